#include "polycrit/pohozaev.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <json.hpp>

#include "polycrit/errors.hpp"

namespace polycrit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTiny = 1e-300;

// A piece of the boundary: part of a sphere (side > 0 keeps x_1 >= c_1), or the flat disk of a half-ball.
struct Piece {
  Point center;
  double radius;
  double sign;  // +1: normal (x - c)/r, -1: the opposite
  bool dirichlet;
  int side = 0;
  bool disk = false;
};

struct Line {
  Point base;
  Point dir;
};

bool on_line(const Line& l, std::span<const double> x) {
  const Point d = subtract(x, l.base);
  const double t = dot(d, l.dir);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += (d[i] - t * l.dir[i]) * (d[i] - t * l.dir[i]);
  return std::sqrt(s) <= 1e-12 * (1.0 + norm(d));
}

// A line through every center of symmetry, if there is one.
std::optional<Line> common_axis(const std::vector<Point>& points, const std::vector<Line>& lines) {
  if (!lines.empty()) {
    const Line& l = lines.front();
    for (const auto& m : lines)
      if (!on_line(l, m.base) || std::abs(std::abs(dot(l.dir, m.dir)) - 1.0) > 1e-12) return std::nullopt;
    for (const auto& p : points)
      if (!on_line(l, p)) return std::nullopt;
    return l;
  }
  if (points.empty()) return std::nullopt;
  const Point& a = points.front();
  for (const auto& b : points)
    if (distance(a, b) > 1e-12 * (1.0 + norm(a))) {
      Point d = subtract(b, a);
      const double nd = norm(d);
      for (auto& v : d) v /= nd;
      Line l{a, d};
      for (const auto& p : points)
        if (!on_line(l, p)) return std::nullopt;
      return l;
    }
  return Line{a, unit_vector(static_cast<int>(a.size()), 0)};
}

bool add_symmetry(const JetProvider& g, std::vector<Point>& points, std::vector<Line>& lines) {
  const Symmetry s = g.symmetry();
  switch (s.kind) {
    case Symmetry::Kind::radial: points.push_back(s.point); return true;
    case Symmetry::Kind::axial: {
      Point d = s.direction;
      const double nd = norm(d);
      for (auto& v : d) v /= nd;
      lines.push_back({s.point, d});
      return true;
    }
    default: return false;
  }
}

std::vector<Piece> boundary_pieces(const Domain& domain, bool dirichlet) {
  return std::visit(
      overloaded{[&](const Ball& b) { return std::vector<Piece>{{b.center, b.radius, 1.0, dirichlet}}; },
                 [&](const HalfBall& b) {
                   return std::vector<Piece>{{b.center, b.radius, 1.0, dirichlet, 1},
                                             {b.center, b.radius, 1.0, dirichlet, 0, true}};
                 },
                 [&](const BallMinusBalls& b) {
                   std::vector<Piece> v{{b.outer.center, b.outer.radius, 1.0, dirichlet}};
                   for (const auto& in : b.inner) v.push_back({in.center, in.radius, -1.0, false});
                   return v;
                 },
                 [&](const auto&) -> std::vector<Piece> {
                   throw UnsupportedError("Pohozaev terms need a ball, half-ball or punctured ball");
                 }},
      domain.shape());
}

Point normal_at(const Piece& pc, std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (pc.disk) {
    Point v(n, 0.0);
    v[0] = -1.0;
    return v;
  }
  Point v = subtract(x, pc.center);
  for (auto& c : v) c *= pc.sign / pc.radius;
  return v;
}

struct Context {
  const JetProvider& u;
  const JetProvider* f;
  double p;
  int n;
  int k;
  Point xi;
};

// Boundary densities: P_k, (1/p)(X,nu) f|u|^p, (-1)^k/2 (X,nu)|(-Delta)^{k/2}u|^2 and -1/2 of the same.
void boundary_density(const Context& c, std::span<const double> x, std::span<const double> nu, std::span<double> out) {
  const int n = c.n, k = c.k;
  const Jet jet = c.u.jet(x, 2 * k);
  const Point X = subtract(x, c.xi);
  const double Xnu = dot(X, nu);
  auto dnu = [&](int i) { return dot(jet.grad_laplacian_power(i), nu); };

  double P = 0.0;
  for (int i = 0; i <= k / 2 - 1; ++i) {
    const double b = jet.laplacian_power(k - i - 1), d = dnu(k - i - 1);
    P += 0.5 * (n - 2.0 * k) * (dnu(i) * b - jet.laplacian_power(i) * d);
    const auto w = x_grad_laplacian(jet, x, i, c.xi);
    P += dot(w.gradient, nu) * b - w.value * d;
  }
  double top2;  // |(-Delta)^{k/2} u|^2
  if (k % 2 == 0) {
    const double v = jet.laplacian_power(k / 2);
    top2 = v * v;
    P += 0.5 * Xnu * top2;
  } else {
    const int m = (k - 1) / 2;
    const double v = jet.laplacian_power(m);
    const Point g = jet.grad_laplacian_power(m);
    const auto h = jet.hessian_laplacian_power(m);
    top2 = dot(g, g);
    // X . grad v and its gradient grad v + Hess(v) X
    const double xg = dot(X, g);
    double dxg = dot(g, nu);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dxg += nu[a] * h[a * n + b] * X[b];
    P += 0.5 * Xnu * jet.laplacian_power(m + 1) * v + 0.5 * (v * dxg - xg * dot(g, nu));
  }
  const double fv = c.f ? c.f->value(x) : 1.0;
  out[0] = P;
  out[1] = Xnu * fv * std::pow(std::abs(jet.value()), c.p) / c.p;
  out[2] = (k % 2 ? -0.5 : 0.5) * Xnu * top2;
  out[3] = -0.5 * Xnu * top2;
}

// Volume densities: ((n-2k)/2 u + X.grad u) E(u), f|u|^p, X.grad f |u|^p.
void volume_density(const Context& c, std::span<const double> x, std::span<double> out) {
  const Jet jet = c.u.jet(x, 2 * c.k);
  const Point X = subtract(x, c.xi);
  double fv = 1.0, xgf = 0.0;
  if (c.f) {
    const Jet fj = c.f->jet(x, 1);
    fv = fj.value();
    xgf = dot(X, fj.gradient());
  }
  const double u = jet.value();
  const double up = std::pow(std::abs(u), c.p);
  out[0] = (0.5 * (c.n - 2.0 * c.k) * u + dot(X, jet.gradient())) * e_operator(jet, c.k, fv, c.p);
  out[1] = fv * up;
  out[2] = xgf * up;
}

// Randomized QMC for several outputs at once; `place` maps uniforms to a point and returns its weight.
std::vector<QuadratureResult> qmc_vector(int udim, int outputs, const QuadOptions& opts,
                                         const std::function<double(std::span<const double>, std::span<double>)>& place,
                                         const std::function<void(std::span<const double>, std::span<double>)>& field,
                                         int n) {
  std::mt19937_64 rng(opts.seed);
  std::vector<std::vector<double>> reps(outputs);
  std::vector<double> u(udim), y(n), vals(outputs);
  for (int r = 0; r < opts.replicates; ++r) {
    ShiftedSobol sob(udim, rng());
    std::vector<double> acc(outputs, 0.0);
    for (int i = 0; i < opts.points; ++i) {
      sob.next(u);
      const double w = place(u, y);
      if (w == 0.0) continue;
      field(y, vals);
      for (int o = 0; o < outputs; ++o) acc[o] += w * vals[o];
    }
    for (int o = 0; o < outputs; ++o) reps[o].push_back(acc[o] / opts.points);
  }
  std::vector<QuadratureResult> out(outputs);
  for (int o = 0; o < outputs; ++o) {
    double mean = 0.0;
    for (double v : reps[o]) mean += v;
    mean /= reps[o].size();
    double var = 0.0;
    for (double v : reps[o]) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, reps[o].size() - 1);
    out[o] = {mean, 2.0 * std::sqrt(var), QuadMethod::qmc, static_cast<long>(opts.points) * opts.replicates};
  }
  return out;
}

void accumulate(std::vector<QuadratureResult>& total, const std::vector<QuadratureResult>& part) {
  if (total.empty()) total.assign(part.size(), {});
  for (std::size_t o = 0; o < part.size(); ++o) {
    total[o].value += part[o].value;
    total[o].error_estimate += part[o].error_estimate;
    total[o].samples_used += part[o].samples_used;
    total[o].method = part[o].method;
  }
}

struct Passes {
  std::vector<QuadratureResult> boundary;   // 4 outputs over all pieces
  std::vector<QuadratureResult> dirichlet;  // the same over the Dirichlet pieces
  std::vector<QuadratureResult> volume;     // 3 outputs
  bool axial = false;
};

Passes run(const Context& c, const Domain& domain, const PohozaevOptions& opts, bool need_volume) {
  const int n = c.n;
  const auto pieces = boundary_pieces(domain, opts.dirichlet);
  std::vector<Point> points{c.xi};
  std::vector<Line> lines;
  bool symmetric = add_symmetry(c.u, points, lines);
  if (c.f) symmetric = add_symmetry(*c.f, points, lines) && symmetric;
  for (const auto& pc : pieces) points.push_back(pc.center);
  std::optional<Line> axis;
  const bool half = std::holds_alternative<HalfBall>(domain.shape());
  if (symmetric && !half) axis = common_axis(points, lines);
  // the volume reduction needs concentric spheres
  const auto* bmb = std::get_if<BallMinusBalls>(&domain.shape());
  if (axis && bmb && (bmb->inner.size() > 1 ||
                      (bmb->inner.size() == 1 && distance(bmb->inner[0].center, bmb->outer.center) > 1e-14)))
    axis.reset();

  Passes out;
  out.axial = axis.has_value();
  for (std::size_t s = 0; s < pieces.size(); ++s) {
    const Piece& pc = pieces[s];
    auto field = [&](std::span<const double> x, std::span<double> vals) {
      boundary_density(c, x, normal_at(pc, x), vals);
    };
    std::vector<QuadratureResult> r;
    if (axis) {
      r = integrate_axial_sphere(field, 4, n, pc.center, axis->dir, pc.radius, opts.tol);
    } else if (pc.disk) {
      const double vol = ball_volume(n - 1, pc.radius);
      r = qmc_vector(
          n, 4, opts.fallback,
          [&](std::span<const double> u, std::span<double> y) {
            std::vector<double> d(n - 1);
            uniforms_to_sphere(u.subspan(1, n - 1), d);
            const double rr = pc.radius * std::pow(u[0], 1.0 / (n - 1));
            y[0] = pc.center[0];
            for (int i = 1; i < n; ++i) y[i] = pc.center[i] + rr * d[i - 1];
            return vol;
          },
          field, n);
    } else {
      const double area = sphere_area(n) * std::pow(pc.radius, n - 1);
      r = qmc_vector(
          n, 4, opts.fallback,
          [&](std::span<const double> u, std::span<double> y) {
            std::vector<double> d(n);
            uniforms_to_sphere(u, d);
            if (pc.side > 0 && d[0] < 0.0) return 0.0;
            for (int i = 0; i < n; ++i) y[i] = pc.center[i] + pc.radius * d[i];
            return area;
          },
          field, n);
    }
    accumulate(out.boundary, r);
    if (pc.dirichlet) accumulate(out.dirichlet, r);
  }
  if (out.dirichlet.empty()) out.dirichlet.assign(4, {});
  if (!need_volume) return out;

  auto vfield = [&](std::span<const double> x, std::span<double> vals) { volume_density(c, x, vals); };
  if (axis) {
    const Ball outer = bmb ? bmb->outer : std::get<Ball>(domain.shape());
    const double r_in = bmb && !bmb->inner.empty() ? bmb->inner[0].radius : 0.0;
    out.volume = integrate_axial_shell(vfield, 3, n, outer.center, axis->dir, r_in, outer.radius, opts.tol, 4);
  } else {
    const Ball bound = domain.bounding_ball();
    const double vol = ball_volume(n, bound.radius);
    out.volume = qmc_vector(
        n + 1, 3, opts.fallback,
        [&](std::span<const double> u, std::span<double> y) {
          std::vector<double> d(n);
          uniforms_to_sphere(u.subspan(1, n), d);
          const double rr = bound.radius * std::pow(u[0], 1.0 / n);
          for (int i = 0; i < n; ++i) y[i] = bound.center[i] + rr * d[i];
          return domain.contains(y) ? vol : 0.0;
        },
        vfield, n);
  }
  return out;
}

Context make_context(const JetProvider& u, const JetProvider* f, double p, const Domain& domain,
                     std::span<const double> xi, int k) {
  const int n = domain.dim();
  if (k < 1 || n <= 2 * k) throw ParameterError("Pohozaev identity needs k >= 1 and n > 2k");
  if (!(p >= 2.0)) throw ParameterError("exponent p must be at least 2");
  if (u.dim() != n || static_cast<int>(xi.size()) != n) throw ParameterError("dimension mismatch");
  if (u.smoothness() < 2 * k) throw ParameterError("u needs jets of order 2k");
  if (f && (f->dim() != n || f->smoothness() < 1)) throw ParameterError("f needs jets of order 1 in R^n");
  return {u, f, p, n, k, Point(xi.begin(), xi.end())};
}

LhsResult lhs_from(const Passes& ps, bool dirichlet) {
  LhsResult r{ps.boundary[0], std::nullopt, std::nullopt};
  if (dirichlet) {
    r.simplified = ps.dirichlet[2];
    r.reduced = ps.dirichlet[3];
  }
  return r;
}

RhsTerms rhs_from(const Context& c, const Passes& ps) {
  RhsTerms t;
  t.T1 = ps.volume[0];
  t.T2 = ps.boundary[1];
  const double c3 = 0.5 * (c.n - 2.0 * c.k) - c.n / c.p;
  t.T3 = ps.volume[1];
  t.T3.value *= c3;
  t.T3.error_estimate *= std::abs(c3);
  t.T4 = ps.volume[2];
  t.T4.value *= -1.0 / c.p;
  t.T4.error_estimate /= c.p;
  return t;
}

nlohmann::json result_json(const QuadratureResult& r) {
  return {{"value", r.value}, {"error_estimate", r.error_estimate}};
}

nlohmann::json domain_json(const Domain& d) {
  using nlohmann::json;
  return std::visit(overloaded{[](const Ball& b) -> json {
                                 return {{"type", "ball"}, {"center", b.center}, {"radius", b.radius}};
                               },
                               [](const HalfBall& b) -> json {
                                 return {{"type", "half_ball"}, {"center", b.center}, {"radius", b.radius}};
                               },
                               [](const BallMinusBalls& b) -> json {
                                 json inner = json::array();
                                 for (const auto& in : b.inner)
                                   inner.push_back({{"center", in.center}, {"radius", in.radius}});
                                 return {{"type", "ball_minus_balls"},
                                         {"outer", {{"center", b.outer.center}, {"radius", b.outer.radius}}},
                                         {"inner", inner}};
                               },
                               [](const auto&) -> json { return {{"type", "other"}}; }},
                    d.shape());
}

}  // namespace

double e_operator(const Jet& jet, int k, double f, double p) {
  if (!(p >= 2.0)) throw ParameterError("exponent p must be at least 2");
  const double u = jet.value();
  return jet.laplacian_power(k) - f * std::pow(std::abs(u), p - 2.0) * u;
}

ValueGrad x_grad_laplacian(const Jet& jet, std::span<const double> x, int i, std::span<const double> xi) {
  const int n = jet.dim();
  if (i < 0) throw ParameterError("Laplacian power must be nonnegative");
  if (jet.order() < 2 * i + 2) throw ParameterError("x_grad_laplacian needs a jet of order 2i + 2");
  const Point X = subtract(x, xi);
  const double v = jet.laplacian_power(i);
  const Point g = jet.grad_laplacian_power(i);
  const auto h = jet.hessian_laplacian_power(i);
  ValueGrad out{dot(X, g) + 2.0 * i * v, Point(n)};
  for (int a = 0; a < n; ++a) {
    double s = (1.0 + 2.0 * i) * g[a];
    for (int b = 0; b < n; ++b) s += h[a * n + b] * X[b];
    out.gradient[a] = s;
  }
  return out;
}

LhsResult pohozaev_lhs(const JetProvider& u, const Domain& domain, std::span<const double> xi, int k,
                       const PohozaevOptions& opts) {
  const auto c = make_context(u, nullptr, 2.0, domain, xi, k);
  return lhs_from(run(c, domain, opts, false), opts.dirichlet);
}

RhsTerms pohozaev_rhs(const JetProvider& u, const JetProvider* f, double p, const Domain& domain,
                      std::span<const double> xi, int k, const PohozaevOptions& opts) {
  const auto c = make_context(u, f, p, domain, xi, k);
  return rhs_from(c, run(c, domain, opts, true));
}

PohozaevReport pohozaev_residual(const JetProvider& u, const JetProvider* f, double p, const Domain& domain,
                                 std::span<const double> xi, int k, const PohozaevOptions& opts) {
  const auto c = make_context(u, f, p, domain, xi, k);
  const auto ps = run(c, domain, opts, true);
  PohozaevReport r;
  r.n = c.n;
  r.k = k;
  r.p = p;
  r.domain = domain;
  r.xi = c.xi;
  r.lhs = lhs_from(ps, opts.dirichlet);
  r.rhs = rhs_from(c, ps);
  r.axial = ps.axial;
  const QuadratureResult* terms[] = {&r.rhs.T1, &r.rhs.T2, &r.rhs.T3, &r.rhs.T4};
  double sum = 0.0, scale = std::abs(r.lhs.full.value);
  r.budget = r.lhs.full.error_estimate;
  for (const auto* t : terms) {
    sum += t->value;
    scale = std::max(scale, std::abs(t->value));
    r.budget += t->error_estimate;
  }
  r.residual_abs = std::abs(r.lhs.full.value - sum);
  scale = std::max(scale, kTiny);
  // rounding in the densities and the sum
  r.budget += 1e3 * std::numeric_limits<double>::epsilon() * scale;
  r.residual_rel = r.residual_abs / scale;
  r.budget_rel = r.budget / scale;
  return r;
}

std::string to_json(const PohozaevReport& r) {
  nlohmann::json terms = {{"lhs", result_json(r.lhs.full)},
                          {"T1", result_json(r.rhs.T1)},
                          {"T2", result_json(r.rhs.T2)},
                          {"T3", result_json(r.rhs.T3)},
                          {"T4", result_json(r.rhs.T4)}};
  if (r.lhs.simplified) terms["dirichlet_simplified"] = result_json(*r.lhs.simplified);
  if (r.lhs.reduced) terms["dirichlet_reduced"] = result_json(*r.lhs.reduced);
  nlohmann::json j = {{"k", r.k},
                      {"n", r.n},
                      {"p", r.p},
                      {"domain", domain_json(r.domain)},
                      {"xi", r.xi},
                      {"terms", terms},
                      {"residual_abs", r.residual_abs},
                      {"residual_rel", r.residual_rel},
                      {"budget", r.budget},
                      {"budget_rel", r.budget_rel},
                      {"method", r.axial ? "axial" : "qmc"}};
  return j.dump(2);
}

Polynomial Polynomial::constant(int n, double c) { return {{{std::vector<int>(n, 0), c}}}; }

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms) {
    int s = 0;
    for (int v : e) s += v;
    if (c != 0.0) d = std::max(d, s);
  }
  return d;
}

bool Polynomial::is_constant() const { return degree() == 0; }

std::shared_ptr<JetProvider> manufactured_dirichlet(int k, int n, const Polynomial& poly) {
  if (k < 1 || n < 1) throw ParameterError("manufactured_dirichlet needs k >= 1 and n >= 1");
  for (const auto& [e, c] : poly.terms) {
    if (static_cast<int>(e.size()) != n) throw ParameterError("polynomial exponent has the wrong dimension");
    for (int v : e)
      if (v < 0) throw ParameterError("polynomial exponents must be nonnegative");
  }
  Symmetry sym;
  if (poly.is_constant()) sym = {Symmetry::Kind::radial, Point(n, 0.0), unit_vector(n, 0)};
  // all derivatives past the degree vanish, so any order is exact
  return std::make_shared<TaylorJetProvider>(
      n, 64,
      [k, n, poly](std::span<const Taylor> x) {
        Taylor s(x[0].set_ptr(), 1.0);
        for (int i = 0; i < n; ++i) s -= x[i] * x[i];
        Taylor q(x[0].set_ptr(), 0.0);
        for (const auto& [e, c] : poly.terms) {
          Taylor m(x[0].set_ptr(), c);
          for (int i = 0; i < n; ++i)
            if (e[i] > 0) m *= pow(x[i], e[i]);
          q += m;
        }
        return pow(s, k) * q;
      },
      sym);
}

}  // namespace polycrit
