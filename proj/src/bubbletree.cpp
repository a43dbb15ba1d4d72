#include "polycrit/bubbletree.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "polycrit/errors.hpp"
#include "polycrit/radialgebra.hpp"

namespace polycrit {

namespace {

using nlohmann::json;

enum class Speed { slower, comparable, faster };  // of bubble j relative to bubble i

Speed compare(const TreeConfig& cfg, int i, int j) {
  if (cfg.family_law) {
    const double gi = cfg.family_law->laws[i - 1].gamma, gj = cfg.family_law->laws[j - 1].gamma;
    if (gj > gi) return Speed::faster;
    if (gj < gi) return Speed::slower;
    return Speed::comparable;
  }
  const double ratio = cfg.bubble(j).mu / cfg.bubble(i).mu;
  const double t = cfg.snapshot.threshold, hi = cfg.snapshot.band * t;
  const double small = std::min(ratio, 1.0 / ratio);
  if (small >= t && small < hi)
    throw AmbiguityError("cannot decide the relative speed of bubbles " + std::to_string(i) + " and " +
                         std::to_string(j) + " (scale ratio " + std::to_string(small) + ")");
  if (small >= hi) return Speed::comparable;
  return ratio < 1.0 ? Speed::faster : Speed::slower;
}

double limsup_ratio(const TreeConfig& cfg, int i, int j) {
  double t = cfg.bubble(i).mu / cfg.bubble(j).mu;
  if (cfg.family_law) t = cfg.family_law->laws[i - 1].c / cfg.family_law->laws[j - 1].c;
  return t + 1.0 / t;
}

double theta_power_bubble(const BubbleSpec& b, std::span<const double> x, int l) {
  return std::pow(theta(b, x), -l) * positive_bubble(b, x);
}

void check_index(const TreeConfig& cfg, int i) {
  if (i < 1 || i > cfg.size()) throw ParameterError("bubble index out of range");
}

void check_order(const TreeConfig& cfg, int l) {
  if (l < 0 || l > 2 * cfg.k - 1) throw ParameterError("derivative order must lie in [0, 2k-1]");
}

Point random_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Point u(n);
  double s = 0.0;
  while (s == 0.0) {
    for (auto& v : u) v = g(rng);
    s = norm(u);
  }
  for (auto& v : u) v /= s;
  return u;
}

void add_to(std::vector<double>& acc, const Jet& j) {
  const auto p = j.partials();
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
}

json ball_json(const Ball& b) { return {{"center", b.center}, {"radius", b.radius}}; }

Ball ball_from(const json& j) { return {j.at("center").get<Point>(), j.at("radius").get<double>()}; }

}  // namespace

void TreeConfig::validate() const {
  if (k < 1 || n <= 2 * k) throw ParameterError("tree needs 1 <= k and n > 2k");
  if (static_cast<int>(omega.center.size()) != n || !(omega.radius > 0.0))
    throw ParameterError("tree domain must be a ball in R^n");
  if (bubbles.empty()) throw ParameterError("tree needs at least one bubble");
  for (std::size_t i = 0; i < bubbles.size(); ++i) {
    const auto& b = bubbles[i];
    b.validate();
    if (b.n != n || b.k != k) throw ParameterError("bubble dimension does not match the tree");
    if (!(b.mu < 1.0)) throw ParameterError("bubble scales must lie in (0,1)");
    if (i > 0 && b.mu > bubbles[i - 1].mu) throw ParameterError("bubbles must be ordered by decreasing scale");
    const double d = distance(b.center, omega.center);
    if (b.kind == BubbleKind::interior && !(d < omega.radius))
      throw ParameterError("interior bubble center must lie inside the domain");
    if (b.kind == BubbleKind::boundary && std::abs(d - omega.radius) > 1e-12 * omega.radius)
      throw ParameterError("boundary bubble center must lie on the boundary");
  }
  if (nu.size() > bubbles.size() + 1) throw ParameterError("too many nu rows");
  for (std::size_t i = 1; i < nu.size(); ++i)
    if (static_cast<int>(nu[i].size()) > n + 1) throw ParameterError("nu row longer than the kernel dimension");
  if (family_law) {
    if (family_law->laws.size() != bubbles.size()) throw ParameterError("one power law per bubble");
    if (!(family_law->alpha >= 1.0)) throw ParameterError("alpha must be at least 1");
    for (const auto& law : family_law->laws)
      if (!(law.gamma > 0.0) || !(law.c > 0.0)) throw ParameterError("power laws need c > 0 and gamma > 0");
  }
}

TreeConfig TreeConfig::at_alpha(double alpha) const {
  if (!family_law) throw ParameterError("at_alpha needs a family law");
  FamilyLaw law = *family_law;
  law.alpha = alpha;
  TreeConfig c = make_family(n, k, omega, std::move(law));
  c.nu = nu;
  c.include_u0 = include_u0;
  c.u0_constant = u0_constant;
  c.u0 = u0;
  c.snapshot = snapshot;
  for (std::size_t i = 0; i < bubbles.size(); ++i) c.bubbles[i].profile = bubbles[i].profile;
  c.validate();
  return c;
}

TreeConfig make_family(int n, int k, Ball omega, FamilyLaw law) {
  TreeConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.omega = std::move(omega);
  for (auto& l : law.laws) {
    if (static_cast<int>(l.x_inf.size()) != n) throw ParameterError("power law limit point has the wrong dimension");
    if (l.d.empty()) l.d.assign(n, 0.0);
    if (static_cast<int>(l.d.size()) != n) throw ParameterError("power law direction has the wrong dimension");
    BubbleSpec b;
    b.n = n;
    b.k = k;
    b.kind = l.kind;
    b.mu = l.c * std::pow(law.alpha, -l.gamma);
    b.center = l.x_inf;
    const double f = std::pow(law.alpha, -l.delta);
    for (int c = 0; c < n; ++c) b.center[c] += f * l.d[c];
    cfg.bubbles.push_back(std::move(b));
  }
  cfg.family_law = std::move(law);
  cfg.validate();
  return cfg;
}

std::string to_json(const TreeConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["omega"] = ball_json(cfg.omega);
  j["include_u0"] = cfg.include_u0;
  j["u0_constant"] = cfg.u0_constant;
  if (cfg.u0) j["u0_external"] = true;
  j["nu"] = cfg.nu;
  j["snapshot"] = {{"threshold", cfg.snapshot.threshold}, {"band", cfg.snapshot.band}};
  json bs = json::array();
  for (const auto& b : cfg.bubbles) bs.push_back(json::parse(to_json(b)));
  j["bubbles"] = bs;
  if (cfg.family_law) {
    json laws = json::array();
    for (const auto& l : cfg.family_law->laws)
      laws.push_back({{"c", l.c}, {"gamma", l.gamma}, {"x_inf", l.x_inf}, {"delta", l.delta}, {"d", l.d},
                      {"kind", l.kind == BubbleKind::boundary ? "boundary" : "interior"}});
    j["family_law"] = {{"alpha", cfg.family_law->alpha}, {"laws", laws}};
  }
  return j.dump(2);
}

TreeConfig tree_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const int n = j.at("n").get<int>(), k = j.at("k").get<int>();
    Ball omega = j.contains("omega") ? ball_from(j["omega"]) : Ball{Point(n, 0.0), 1.0};
    if (j.value("u0_external", false)) throw ParameterError("tree json: external u_0 must be attached in code");
    TreeConfig cfg;
    if (j.contains("family_law")) {
      const auto& f = j["family_law"];
      FamilyLaw law;
      law.alpha = f.at("alpha").get<double>();
      for (const auto& l : f.at("laws")) {
        const std::string kind = l.value("kind", "interior");
        if (kind != "interior" && kind != "boundary") throw ParameterError("tree json: unknown kind " + kind);
        law.laws.push_back({l.value("c", 1.0), l.at("gamma").get<double>(), l.at("x_inf").get<Point>(),
                            l.value("delta", 0.0), l.value("d", Point{}),
                            kind == "boundary" ? BubbleKind::boundary : BubbleKind::interior});
      }
      cfg = make_family(n, k, omega, std::move(law));
    } else {
      cfg.n = n;
      cfg.k = k;
      cfg.omega = omega;
      for (auto b : j.at("bubbles")) {
        b["n"] = n;
        b["k"] = k;
        cfg.bubbles.push_back(bubble_from_json(b.dump()));
      }
    }
    cfg.include_u0 = j.value("include_u0", false);
    cfg.u0_constant = j.value("u0_constant", 0.0);
    cfg.nu = j.value("nu", std::vector<std::vector<double>>{});
    if (j.contains("snapshot")) {
      cfg.snapshot.threshold = j["snapshot"].value("threshold", 1e-2);
      cfg.snapshot.band = j["snapshot"].value("band", 10.0);
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("tree json: ") + e.what());
  }
}

double epsilon(const TreeConfig& cfg, int i, int j) {
  check_index(cfg, i);
  check_index(cfg, j);
  if (i == j) throw ParameterError("epsilon needs two distinct bubbles");
  const auto &a = cfg.bubble(std::min(i, j)), &b = cfg.bubble(std::max(i, j));
  const double d = distance(a.center, b.center);
  return d * d / (a.mu * b.mu) + a.mu / b.mu + b.mu / a.mu;
}

bool InfluenceRegion::contains(std::span<const double> x) const {
  if (distance(x, ball.center) >= ball.radius) return false;
  if (distance(x, omega.center) >= omega.radius) return false;
  for (const auto& h : holes)
    if (distance(x, h.center) < h.radius) return false;
  return true;
}

Domain InfluenceRegion::domain() const {
  if (distance(ball.center, omega.center) + ball.radius > omega.radius)
    throw UnsupportedError("influence ball is not inside the domain");
  for (std::size_t a = 0; a < holes.size(); ++a) {
    if (distance(holes[a].center, ball.center) + holes[a].radius > ball.radius)
      throw UnsupportedError("hole is not inside the influence ball");
    for (std::size_t b = 0; b < a; ++b)
      if (distance(holes[a].center, holes[b].center) < holes[a].radius + holes[b].radius)
        throw UnsupportedError("overlapping holes");
  }
  return Domain(BallMinusBalls{ball, holes});
}

InfluenceData classify(const TreeConfig& cfg) {
  cfg.validate();
  const int N = cfg.size(), n = cfg.n, k = cfg.k;
  const double a = bubble_constant(n, k);
  InfluenceData data;
  data.entries.resize(N);
  for (int i = 1; i <= N; ++i) {
    auto& e = data.entries[i - 1];
    const auto& bi = cfg.bubble(i);
    e.r = std::sqrt(bi.mu);
    for (int j = 1; j <= N; ++j) {
      if (j == i) continue;
      const Speed sp = compare(cfg, i, j);
      if (sp == Speed::faster) {
        e.Ac.push_back(j);
        continue;
      }
      e.A.push_back(j);
      const auto& bj = cfg.bubble(j);
      const double d = distance(bi.center, bj.center);
      double s2 = bi.mu / bj.mu * (bj.mu * bj.mu + a * d * d) / a;
      if (sp == Speed::comparable) {
        e.m[j] = limsup_ratio(cfg, i, j);
        s2 /= 4.0 * e.m[j];
      }
      e.s[j] = std::sqrt(s2);
      e.r = std::min(e.r, e.s[j]);
    }
    e.region = {Ball{bi.center, e.r}, {}, cfg.omega};
    for (int j : e.Ac) {
      const auto& bj = cfg.bubble(j);
      const double d = distance(bi.center, bj.center);
      if (d > 2.0 * e.r) continue;
      e.B.push_back(j);
      e.rho[j] = 2.0 * std::pow(bj.mu / bi.mu, (n - 2.0 * k) / (2.0 * (n - 1))) * (d + bi.mu);
      e.region.holes.push_back({bj.center, e.rho[j]});
    }
  }
  return data;
}

std::string to_json(const InfluenceData& data) {
  json out = json::array();
  for (std::size_t i = 0; i < data.entries.size(); ++i) {
    const auto& e = data.entries[i];
    auto keyed = [](const std::map<int, double>& m) {
      json o = json::object();
      for (const auto& [j, v] : m) o[std::to_string(j)] = v;
      return o;
    };
    json holes = json::array();
    for (const auto& h : e.region.holes) holes.push_back(ball_json(h));
    out.push_back({{"index", i + 1},
                   {"A", e.A},
                   {"A_complement", e.Ac},
                   {"B", e.B},
                   {"s", keyed(e.s)},
                   {"m", keyed(e.m)},
                   {"rho", keyed(e.rho)},
                   {"r", e.r},
                   {"region", {{"ball", ball_json(e.region.ball)}, {"holes", holes}, {"omega", ball_json(e.region.omega)}}}});
  }
  return out.dump(2);
}

std::vector<Point> sample_region(const TreeConfig& cfg, const InfluenceData& data, int i, const SampleOptions& opts) {
  check_index(cfg, i);
  const auto& reg = data.at(i).region;
  const int n = cfg.n;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Point> pts;
  auto keep = [&](Point p) {
    if (reg.contains(p)) pts.push_back(std::move(p));
  };
  keep(reg.ball.center);
  const int background = opts.count / 2;
  for (int s = 0; s < background; ++s) {
    const Point d = random_direction(rng, n);
    const double r = reg.ball.radius * std::pow(u01(rng), 1.0 / n);
    Point p = reg.ball.center;
    for (int c = 0; c < n; ++c) p[c] += r * d[c];
    keep(std::move(p));
  }
  // shells about every bubble center, out to the size of the influence ball
  std::vector<std::pair<const BubbleSpec*, double>> shells;
  for (const auto& b : cfg.bubbles) {
    if (distance(b.center, reg.ball.center) > 2.0 * reg.ball.radius) continue;
    for (double r = 0.5 * b.mu; r <= 2.0 * reg.ball.radius; r *= 2.0) shells.push_back({&b, r});
  }
  if (shells.empty()) return pts;
  const int per = std::max(1, (opts.count - background) / static_cast<int>(shells.size()));
  for (const auto& [b, r] : shells)
    for (int s = 0; s < per; ++s) {
      const Point d = random_direction(rng, n);
      Point p = b->center;
      for (int c = 0; c < n; ++c) p[c] += r * d[c];
      keep(std::move(p));
    }
  return pts;
}

DominanceReport check_dominance(const TreeConfig& cfg, const InfluenceData& data, int i, int l,
                                const SampleOptions& opts) {
  check_order(cfg, l);
  const auto pts = sample_region(cfg, data, i, opts);
  if (pts.empty()) throw ParameterError("influence region of bubble " + std::to_string(i) + " is empty");
  double sup = 0.0;
  for (const auto& x : pts) {
    double num = 1.0;
    for (const auto& b : cfg.bubbles) num += theta_power_bubble(b, x, l);
    sup = std::max(sup, num / theta_power_bubble(cfg.bubble(i), x, l));
  }
  return {l, sup, static_cast<int>(pts.size())};
}

InteractionReport interaction_sup(const TreeConfig& cfg, const InfluenceData& data, int i, const SampleOptions& opts) {
  if (!cfg.family_law) throw ParameterError("interaction_sup needs a family-law configuration");
  const auto pts = sample_region(cfg, data, i, opts);
  if (pts.empty()) throw ParameterError("influence region of bubble " + std::to_string(i) + " is empty");
  const int n = cfg.n, k = cfg.k, N = cfg.size();
  const double crit = 2.0 * n / (n - 2 * k);
  double sup = 0.0;
  for (const auto& x : pts) {
    // sum over r != s of B_r^{2#-2} B_s, with B_0 = 1
    std::vector<double> v{1.0};
    double total = 1.0;
    for (const auto& b : cfg.bubbles) {
      v.push_back(positive_bubble(b, x));
      total += v.back();
    }
    double sum = 0.0;
    for (double br : v) sum += std::pow(br, crit - 2.0) * (total - br);
    sup = std::max(sup, sum);
  }
  const double mu = cfg.bubble(i).mu;
  const double e = std::min(n - 2.0 * k, 4.0 * k);
  double t1 = 0.0, t2 = 0.0;
  for (int a = 1; a <= N; ++a) {
    const auto& ea = data.at(a);
    for (int b : ea.A) t1 = std::max(t1, 1.0 / std::sqrt(epsilon(cfg, a, b)));
    for (int b : ea.Ac)
      t2 = std::max(t2, std::pow(cfg.bubble(b).mu / cfg.bubble(a).mu, (2.0 * k - 1) / (2.0 * (n - 1))));
  }
  InteractionReport rep;
  rep.lhs = std::pow(mu, 0.5 * (n + 2 * k)) * sup;
  rep.bound = std::pow(t1, e) + std::pow(t2, e) + std::pow(mu, 0.5 * (n - 2 * k)) + std::pow(mu, 2.0 * k);
  rep.ratio = rep.lhs / rep.bound;
  return rep;
}

RhoReport check_rho_dominance(const TreeConfig& cfg, const InfluenceData& data, int i, int j, int l,
                              const SampleOptions& opts) {
  check_index(cfg, i);
  check_order(cfg, l);
  const auto& e = data.at(i);
  const auto it = e.rho.find(j);
  if (it == e.rho.end()) throw ParameterError("bubble " + std::to_string(j) + " is not in B_" + std::to_string(i));
  const auto &bi = cfg.bubble(i), &bj = cfg.bubble(j);
  const double rho = it->second;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RhoReport rep{INFINITY, 0.0};
  const double outer = e.r;
  for (int s = 0; s < opts.count; ++s) {
    // log-uniform distance from x^j between mu^j/4 and the influence radius
    const double lo = std::log(0.25 * bj.mu), hi = std::log(std::max(outer, 2.0 * rho));
    const double r = std::exp(lo + (hi - lo) * u01(rng));
    const Point d = random_direction(rng, cfg.n);
    Point x = bj.center;
    for (int c = 0; c < cfg.n; ++c) x[c] += r * d[c];
    if (distance(x, bi.center) >= outer) continue;
    const double q = theta_power_bubble(bj, x, l) / theta_power_bubble(bi, x, l);
    if (r < rho)
      rep.inside_min = std::min(rep.inside_min, q);
    else
      rep.outside_max = std::max(rep.outside_max, q);
  }
  return rep;
}

double eval_tree(const TreeConfig& cfg, std::span<const double> x, int l) {
  cfg.validate();
  check_order(cfg, l);
  const int n = cfg.n;
  if (static_cast<int>(x.size()) != n) throw ParameterError("eval_tree: dimension mismatch");
  const Domain omega(cfg.omega);
  const auto set = MultiIndexSet::get(n, l);
  std::vector<double> acc(set->size(), 0.0);
  auto add = [&](const Jet& j) { add_to(acc, j); };
  if (cfg.include_u0) {
    if (cfg.u0) {
      add(cfg.u0->jet(x, l));
    } else {
      auto X = Taylor::variables(x, l);
      add(Jet::from_taylor(Taylor(X[0].set_ptr(), cfg.u0_constant)));
    }
  }
  if (!cfg.nu.empty())
    for (double v : cfg.nu[0])
      if (v != 0.0) throw UnsupportedError("kernel elements of u_0 are not available");
  std::vector<std::shared_ptr<JetProvider>> kernel;
  for (int i = 1; i <= cfg.size(); ++i) {
    const auto& b = cfg.bubble(i);
    add(bubble_jet(b, x, l, omega));
    if (static_cast<int>(cfg.nu.size()) <= i) continue;
    for (std::size_t j = 0; j < cfg.nu[i].size(); ++j) {
      const double v = cfg.nu[i][j];
      if (v == 0.0) continue;
      if (!b.standard()) throw UnsupportedError("nu terms need the standard profile");
      if (kernel.empty()) kernel = kernel_elements(n, cfg.k);
      BubbleSpec z = b;
      z.profile = kernel[j];
      const Jet jz = bubble_jet(z, x, l, omega);
      std::vector<double> scaled(jz.partials().begin(), jz.partials().end());
      for (auto& s : scaled) s *= v;
      add(Jet(set, std::move(scaled)));
    }
  }
  return Jet(set, acc).tensor_norm(l);
}

}  // namespace polycrit
