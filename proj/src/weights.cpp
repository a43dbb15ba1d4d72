#include "polycrit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "polycrit/errors.hpp"

namespace polycrit {

namespace {

double sharp(const TreeConfig& cfg) { return 2.0 * cfg.n / (cfg.n - 2.0 * cfg.k); }

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

bool in_closed(const Ball& b, std::span<const double> x) {
  return distance(x, b.center) <= b.radius * (1.0 + 1e-14);
}

Point uniform_in(const Ball& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int n = static_cast<int>(b.center.size());
  const Point d = random_direction(rng, n);
  const double r = b.radius * std::pow(u01(rng), 1.0 / n);
  Point p = b.center;
  for (int c = 0; c < n; ++c) p[c] += r * d[c];
  return p;
}

// theta^{-l} B for one bubble
double tb(const BubbleSpec& b, std::span<const double> x, int l) {
  return std::pow(theta(b, x), -l) * positive_bubble(b, x);
}

void check_order(const TreeConfig& cfg, int l) {
  if (l < 0 || l > 2 * cfg.k - 1) throw ParameterError("derivative order must lie in [0, 2k-1]");
}

void check_index(const TreeConfig& cfg, int i) {
  if (i < 1 || i > cfg.size()) throw ParameterError("bubble index out of range");
}

// Where convolution bounds are probed: the centers of the focus bubbles, points at
// distances mu 8^t from them, the domain center and uniform points.
std::vector<Point> probe_points(const TreeConfig& cfg, const std::vector<int>& focus, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  auto keep = [&](Point p) {
    if (in_closed(cfg.omega, p)) pts.push_back(std::move(p));
  };
  keep(cfg.omega.center);
  for (int i : focus) {
    const auto& b = cfg.bubble(i);
    keep(b.center);
    for (double r = b.mu; r < 2.0 * cfg.omega.radius; r *= 8.0) {
      const Point d = random_direction(rng, cfg.n);
      Point p = b.center;
      for (int c = 0; c < cfg.n; ++c) p[c] += r * d[c];
      keep(std::move(p));
    }
  }
  while (static_cast<int>(pts.size()) < count) keep(uniform_in(cfg.omega, rng));
  return pts;
}

std::vector<Peak> bubble_peaks(const TreeConfig& cfg) {
  std::vector<Peak> peaks;
  for (const auto& b : cfg.bubbles) peaks.push_back({b.center, b.mu, 0.0});
  return peaks;
}

QuadratureResult integrate(const ScalarField& f, std::vector<Peak> peaks, const Domain& dom, const QuadOptions& opts) {
  return integrate_volume(Integrand(f, std::move(peaks)), dom, opts);
}

// Sampling hints for |x-y|^{-order} g(y) with g concentrated on the given bubbles.
// A bubble whose core contains x takes over the singularity at its own scale.
std::vector<Peak> singular_peaks(const std::vector<const BubbleSpec*>& bubbles, const Point& x, double order,
                                 double radius) {
  std::vector<Peak> peaks;
  double scale = 1e-3 * radius;
  for (const auto* b : bubbles) {
    const double d = distance(x, b->center);
    const bool core = d < b->mu;
    peaks.push_back({b->center, b->mu, core ? order : 0.0});
    scale = std::min(scale, std::max(d, b->mu));
  }
  peaks.push_back({x, scale, order});
  return peaks;
}

double kernel(std::span<const double> x, std::span<const double> y, double power) {
  return std::pow(distance(x, y), power);
}

}  // namespace

double psi_weight(const TreeConfig& cfg, std::span<const double> y) {
  const int N = cfg.size();
  const double e = sharp(cfg) - 2.0;
  std::vector<double> B(N + 1, 1.0), Be(N + 1, 1.0);
  for (int i = 1; i <= N; ++i) {
    B[i] = positive_bubble(cfg.bubble(i), y);
    Be[i] = std::pow(B[i], e);
  }
  double psi = 0.0;
  for (int i = 1; i <= N; ++i) psi += std::pow(theta(cfg.bubble(i), y), 2.0 - 2.0 * cfg.k) * B[i];
  // sum over j of B_j^{2#-2} (sum_{i != j} B_i), written without cancellation
  for (int j = 0; j <= N; ++j) {
    double others = 0.0;
    for (int i = 0; i <= N; ++i)
      if (i != j) others += B[i];
    psi += Be[j] * others;
  }
  return psi;
}

double weight_denominator(const TreeConfig& cfg, std::span<const double> y, int l) {
  double s = 1.0;
  for (const auto& b : cfg.bubbles) s += tb(b, y, l);
  return s;
}

std::vector<Point> weight_grid(const TreeConfig& cfg, const GridOptions& opts) {
  if (opts.count < 0 || opts.per_shell < 0) throw ParameterError("grid counts must be nonnegative");
  std::mt19937_64 rng(opts.seed);
  std::vector<Point> pts;
  auto keep = [&](Point p) {
    if (in_closed(cfg.omega, p)) pts.push_back(std::move(p));
  };
  keep(cfg.omega.center);
  for (const auto& b : cfg.bubbles) {
    keep(b.center);
    for (double r = 0.25 * b.mu; r <= 2.0 * cfg.omega.radius; r *= 2.0)
      for (int s = 0; s < opts.per_shell; ++s) {
        const Point d = random_direction(rng, cfg.n);
        Point p = b.center;
        for (int c = 0; c < cfg.n; ++c) p[c] += r * d[c];
        keep(std::move(p));
      }
  }
  for (int s = 0; s < opts.count; ++s) keep(uniform_in(cfg.omega, rng));
  return pts;
}

WeightProfile::WeightProfile(TreeConfig c, std::vector<Point> g, double e)
    : cfg(std::move(c)), grid(std::move(g)), eta(e) {
  if (grid.empty()) throw ParameterError("weight grid is empty");
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  cfg.validate();
}

double star_norm(const JetProvider& phi, const TreeConfig& cfg, std::span<const Point> grid) {
  const int top = 2 * cfg.k - 1;
  if (phi.dim() != cfg.n) throw ParameterError("function dimension does not match the tree");
  if (phi.smoothness() < top) throw ParameterError("star norm needs jets of order 2k-1");
  double best = 0.0;
  for (const auto& y : grid) {
    const Jet j = phi.jet(y, top);
    double s = 0.0;
    for (int l = 0; l <= top; ++l) s += j.tensor_norm(l) / weight_denominator(cfg, y, l);
    best = std::max(best, s);
  }
  return best;
}

double starstar_norm(const ScalarField& R, const TreeConfig& cfg, std::span<const Point> grid, double eta) {
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  const double e = sharp(cfg) - 1.0;
  double best = 0.0;
  for (const auto& y : grid) {
    double tail = 1.0;
    for (const auto& b : cfg.bubbles) tail += std::pow(positive_bubble(b, y), e);
    best = std::max(best, std::abs(R(y)) / (psi_weight(cfg, y) + eta * tail));
  }
  return best;
}

double eta3(const TreeConfig& cfg) {
  const auto data = classify(cfg);
  const int n = cfg.n, k = cfg.k, N = cfg.size();
  double e1 = 0.0, e2 = 0.0, mu = 0.0;
  for (int i = 1; i <= N; ++i) {
    const auto& entry = data.at(i);
    for (int j : entry.A) e1 = std::max(e1, 1.0 / std::sqrt(epsilon(cfg, i, j)));
    for (int j : entry.Ac)
      e2 = std::max(e2, std::pow(cfg.bubble(j).mu / cfg.bubble(i).mu, (2.0 * k - 1) / (2.0 * (n - 1))));
    mu = std::max(mu, cfg.bubble(i).mu);
  }
  const double p = std::min(n - 2.0 * k, 4.0 * k);
  const double q = std::min({(n - 2.0 * k) / 2.0, 2.0 * k, 1.0});
  return std::pow(e1, p) + std::pow(e2, p) + std::pow(mu, q);
}

double eta4(const TreeConfig& cfg, std::span<const double> A_deltas, double nu_max) {
  double nu = std::abs(nu_max);
  for (const auto& row : cfg.nu)
    for (double v : row) nu = std::max(nu, std::abs(v));
  double a = 0.0;
  for (double d : A_deltas) {
    if (!(d >= 0.0)) throw ParameterError("coefficient distances must be nonnegative");
    a += d;
  }
  return nu + a;
}

QuadratureResult eta1(const TreeConfig& cfg, const QuadOptions& opts) {
  cfg.validate();
  const double p = 2.0 * cfg.n / (cfg.n + 2.0 * cfg.k);
  auto r = integrate([&](std::span<const double> y) { return std::pow(psi_weight(cfg, y), p); }, bubble_peaks(cfg),
                     Domain(cfg.omega), opts);
  const double v = std::pow(r.value, 1.0 / p);
  // first-order propagation through the 1/p power
  r.error_estimate = v * r.error_estimate / (p * r.value);
  r.value = v;
  return r;
}

QuadratureResult psi_convolution(const TreeConfig& cfg, std::span<const double> x, int l, const QuadOptions& opts) {
  check_order(cfg, l);
  const double s = 2.0 * cfg.k - cfg.n - l;
  std::vector<const BubbleSpec*> all;
  for (const auto& b : cfg.bubbles) all.push_back(&b);
  return integrate([&](std::span<const double> y) { return kernel(x, y, s) * psi_weight(cfg, y); },
                   singular_peaks(all, Point(x.begin(), x.end()), -s, cfg.omega.radius), Domain(cfg.omega), opts);
}

EtaSequences eta_sequences(const TreeConfig& cfg, std::span<const double> A_deltas, double nu_max,
                           const EtaOptions& opts) {
  cfg.validate();
  EtaSequences out;
  auto q = opts.quad;
  out.eta1 = eta1(cfg, q).value;
  std::vector<int> all;
  for (int i = 1; i <= cfg.size(); ++i) all.push_back(i);
  for (const auto& x : probe_points(cfg, all, opts.x_samples, opts.seed))
    for (int l = 0; l <= 2 * cfg.k - 1; ++l) {
      q.seed = opts.quad.seed + static_cast<std::uint64_t>(l);
      out.eta2 = std::max(out.eta2, psi_convolution(cfg, x, l, q).value / weight_denominator(cfg, x, l));
    }
  out.eta3 = eta3(cfg);
  out.eta4 = eta4(cfg, A_deltas, nu_max);
  out.eta = std::max({out.eta1, out.eta2, out.eta3, out.eta4});
  return out;
}

GiraudResult giraud_verify(double gamma, double beta, double mu, std::span<const double> x,
                           std::span<const double> y, const Ball& omega, const QuadOptions& opts) {
  const int n = static_cast<int>(omega.center.size());
  if (n < 3) throw ParameterError("Giraud estimate needs n >= 3");
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (!(beta + gamma < n)) throw ParameterError("beta + gamma must be below n");
  if (!(mu > 0.0 && mu < 1.0)) throw ParameterError("mu must lie in (0,1)");
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw ParameterError("points have the wrong dimension");
  if (!in_closed(omega, x) || !in_closed(omega, y)) throw ParameterError("points must lie in the closed domain");
  const Point px(x.begin(), x.end()), py(y.begin(), y.end());
  auto f = [&](std::span<const double> z) {
    return std::pow(mu + distance(px, z), gamma - n) * std::pow(distance(z, py), beta - n);
  };
  const auto r = integrate(f, {{px, mu, 0.0}, {py, 0.0, n - beta}}, Domain(omega), opts);
  const double t = mu + distance(px, py);
  double bound;
  if (gamma < 0.0)
    bound = std::pow(mu, gamma) * std::pow(t, beta - n);
  else if (gamma == 0.0)
    bound = std::pow(t, beta - n) * (1.0 + std::abs(std::log(t / mu)));
  else
    bound = std::pow(t, beta + gamma - n);
  return {r.value, bound, r.value / bound, r.error_estimate};
}

LemmaKind lemma_kind(const std::string& name) {
  if (name == "ordre2") return LemmaKind::ordre2;
  if (name == "trou0") return LemmaKind::trou0;
  if (name == "trou") return LemmaKind::trou;
  if (name == "lemBiBj") return LemmaKind::lemBiBj;
  if (name == "lem2") return LemmaKind::lem2;
  throw ParameterError("unknown lemma kind '" + name + "'");
}

std::string to_string(LemmaKind kind) {
  switch (kind) {
    case LemmaKind::ordre2: return "ordre2";
    case LemmaKind::trou0: return "trou0";
    case LemmaKind::trou: return "trou";
    case LemmaKind::lemBiBj: return "lemBiBj";
    case LemmaKind::lem2: return "lem2";
  }
  return "?";
}

std::vector<RatioRow> convolution_bound_verify(LemmaKind kind, const TreeConfig& cfg, const ConvolutionParams& params) {
  cfg.validate();
  const int n = cfg.n, k = cfg.k;
  const int i = params.i, l = params.l;
  check_index(cfg, i);
  check_order(cfg, l);
  if (kind == LemmaKind::lemBiBj) {
    check_index(cfg, params.j);
    if (params.j == i) throw ParameterError("lemBiBj needs two distinct bubbles");
    if (params.p >= 0) {
      if (params.p > k - 1) throw ParameterError("p must lie in [0, k-1]");
      if (!(n > 4 * k - 2 * params.p)) throw ParameterError("second lemBiBj estimate needs n > 4k - 2p");
    }
  }
  if (!params.alphas.empty() && !cfg.family_law) throw ParameterError("an alpha sweep needs a family law");
  if (kind == LemmaKind::trou && !params.M.empty() && !params.alphas.empty() && params.M.size() != params.alphas.size())
    throw ParameterError("one M per sweep point");
  for (double m : params.M)
    if (!(m >= 1.0)) throw ParameterError("M must be at least 1");

  const std::vector<double> sweep = params.alphas.empty() ? std::vector<double>{0.0} : params.alphas;
  const double e = sharp(cfg);
  const double q = (n - 2.0 * k) / 2.0;
  std::vector<RatioRow> rows;
  for (std::size_t s = 0; s < sweep.size(); ++s) {
    const TreeConfig c = params.alphas.empty() ? cfg : cfg.at_alpha(sweep[s]);
    const auto& bi = c.bubble(i);
    const double tag = params.alphas.empty() ? bi.mu : sweep[s];
    RatioRow row{to_string(kind), {{"i", i}}, tag, 0.0, 0.0, 0.0};
    auto opts = params.quad;
    opts.seed = params.quad.seed + s;

    if (kind == LemmaKind::lemBiBj) {
      const auto& bj = c.bubble(params.j);
      const double ex = params.p < 0 ? k - n : 2.0 * k - params.p - n;
      auto f = [&](std::span<const double> y) { return std::pow(theta(bi, y), ex) * std::pow(theta(bj, y), ex); };
      const auto r = integrate(f, {{bi.center, bi.mu, 0.0}, {bj.center, bj.mu, 0.0}}, Domain(c.omega), opts);
      row.params.push_back({"j", params.j});
      row.params.push_back({"p", params.p});
      row.lhs = std::pow(bi.mu * bj.mu, q) * r.value;
      row.rhs = params.p < 0 ? 1.0 : std::pow(bi.mu * bj.mu, k - params.p);
      row.ratio = row.lhs / row.rhs;
      row.ratio_error = std::pow(bi.mu * bj.mu, q) * r.error_estimate / row.rhs;
      rows.push_back(std::move(row));
      continue;
    }

    row.params.push_back({"l", l});
    const double ks = 2.0 * k - n - l;
    double M = 0.0;
    std::optional<Domain> dom;
    if (kind == LemmaKind::trou) {
      M = params.M.empty() ? 1.0 / std::sqrt(bi.mu) : params.M[std::min(s, params.M.size() - 1)];
      row.params.push_back({"M", M});
      dom.emplace(BallMinusBalls{c.omega, {Ball{bi.center, M * bi.mu}}});
    } else {
      dom.emplace(c.omega);
    }
    std::function<double(std::span<const double>)> g;
    switch (kind) {
      case LemmaKind::ordre2:
        g = [&](std::span<const double> y) { return theta(bi, y) * std::pow(positive_bubble(bi, y), e - 1.0); };
        break;
      case LemmaKind::trou0:
        g = [&](std::span<const double> y) { return std::pow(positive_bubble(bi, y), e - 2.0); };
        break;
      case LemmaKind::trou:
        g = [&](std::span<const double> y) { return std::pow(positive_bubble(bi, y), e - 1.0); };
        break;
      default:
        g = [&](std::span<const double> y) { return psi_weight(c, y); };
    }
    std::vector<int> focus = kind == LemmaKind::lem2 ? std::vector<int>{} : std::vector<int>{i};
    if (kind == LemmaKind::lem2)
      for (int b = 1; b <= c.size(); ++b) focus.push_back(b);
    row.ratio = -1.0;
    for (const auto& x : probe_points(c, focus, params.x_samples, params.seed)) {
      std::vector<const BubbleSpec*> near;
      for (int b : focus) near.push_back(&c.bubble(b));
      auto peaks = singular_peaks(near, x, -ks, c.omega.radius);
      // outside the hole the mass sits at scale M mu
      if (kind == LemmaKind::trou) peaks.front().scale = M * bi.mu;
      const auto r = integrate([&](std::span<const double> y) { return kernel(x, y, ks) * g(y); }, std::move(peaks),
                               *dom, opts);
      double rhs = 0.0;
      switch (kind) {
        case LemmaKind::ordre2: rhs = bi.mu * tb(bi, x, l); break;
        case LemmaKind::trou0: rhs = 1.0 + tb(bi, x, l); break;
        case LemmaKind::trou: rhs = std::pow(M, -2.0 * k) * tb(bi, x, l); break;
        default: rhs = weight_denominator(c, x, l);
      }
      if (r.value / rhs > row.ratio) {
        row.lhs = r.value;
        row.rhs = rhs;
        row.ratio = r.value / rhs;
        row.ratio_error = r.error_estimate / rhs;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ratio_csv(std::span<const RatioRow> rows) {
  std::ostringstream out;
  out.precision(10);
  out << "kind";
  if (!rows.empty())
    for (const auto& [name, v] : rows.front().params) out << ',' << name;
  out << ",mu_or_alpha,lhs,rhs,ratio\n";
  for (const auto& r : rows) {
    if (!rows.empty() && r.params.size() != rows.front().params.size())
      throw ParameterError("rows of one table must share their parameters");
    out << r.kind;
    for (const auto& [name, v] : r.params) out << ',' << v;
    out << ',' << r.mu_or_alpha << ',' << r.lhs << ',' << r.rhs << ',' << r.ratio << '\n';
  }
  return out.str();
}

}  // namespace polycrit
