#include "polycrit/quad.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include "polycrit/errors.hpp"

namespace polycrit {

namespace {

constexpr double kTiny = 1e-300;
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// int_0^rmax G(r) r^{n-1} dr, where G ~ r^{-sigma} at 0, split at geometric nodes and breakpoints.
// On each piece u = r^m with m = n - sigma flattens the endpoint behaviour.
QuadratureResult radial_core(const std::function<double(double)>& G, int n, double sigma, double rmax,
                             std::vector<double> breaks, double tol) {
  if (!(sigma < n)) throw ParameterError("radial quadrature needs singularity order below the dimension");
  if (rmax <= 0.0) return {0.0, 0.0, QuadMethod::deterministic_radial, 0};
  const double m = n - sigma;
  std::vector<double> nodes{0.0, rmax};
  double r = rmax;
  for (int j = 0; j < 26; ++j) {
    r *= 0.25;
    nodes.push_back(r);
  }
  for (double b : breaks)
    if (b > 0.0 && b < rmax) nodes.push_back(b);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  QuadratureResult out;
  long evals = 0;
  auto h = [&](double u) {
    ++evals;
    if (u <= 0.0) return 0.0;
    const double rr = std::pow(u, 1.0 / m);
    const double v = G(rr) * std::pow(rr, sigma) / m;
    return std::isfinite(v) ? v : 0.0;
  };
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double ua = std::pow(nodes[i], m), ub = std::pow(nodes[i + 1], m);
    if (!(ub > ua)) continue;
    // normalized to [0, 1]: the library's error floor misbehaves on very short intervals
    const double w = ub - ua;
    double err = 0.0;
    out.value += w * GK::integrate([&](double t) { return h(ua + w * t); }, 0.0, 1.0, 15, tol, &err);
    out.error_estimate += w * err;
  }
  out.samples_used = evals;
  return out;
}

struct Sampler {
  bool uniform;
  Point center;
  double rmax;
  double s;
  double beta;
  double w_in;
  int n;
  double omega;

  void sample(std::span<const double> u, std::span<double> y) const {
    std::vector<double> dir(n);
    uniforms_to_sphere(u.subspan(1, n), dir);
    double r;
    if (uniform) {
      r = rmax * std::pow(u[0], 1.0 / n);
    } else if (u[0] < w_in) {
      r = s * std::pow(u[0] / w_in, 1.0 / beta);
    } else {
      r = s * std::pow(rmax / s, (u[0] - w_in) / (1.0 - w_in));
    }
    for (int i = 0; i < n; ++i) y[i] = center[i] + r * dir[i];
  }

  double density(std::span<const double> y) const {
    const double r = distance(y, center);
    if (r > rmax) return 0.0;
    if (uniform) return 1.0 / ball_volume(n, rmax);
    if (r == 0.0) return INFINITY;
    double rho;
    if (r < s)
      rho = w_in * beta * std::pow(r / s, beta - 1.0) / s;
    else
      rho = (1.0 - w_in) / (r * std::log(rmax / s));
    return rho / (omega * std::pow(r, n - 1));
  }
};

Sampler log_radial(int n, const Point& c, double scale, double order, const Ball& bound) {
  const double rmax = distance(c, bound.center) + bound.radius;
  Sampler smp{false, c, rmax, std::min(scale, rmax), n - std::min(order, n - 0.5), 0.3, n, sphere_area(n)};
  if (smp.s >= rmax) smp.w_in = 1.0;
  return smp;
}

QuadratureResult qmc_integrate(const ScalarField& f, const Domain& domain, const std::vector<Peak>& peaks,
                               const QuadOptions& opts) {
  const int n = domain.dim();
  const Ball bound = domain.bounding_ball();
  std::vector<Sampler> comps;
  comps.push_back({true, bound.center, bound.radius, bound.radius, double(n), 1.0, n, sphere_area(n)});
  for (const auto& p : peaks) {
    const double sc = p.scale > 0.0 ? p.scale : 1e-3 * bound.radius;
    comps.push_back(log_radial(n, p.center, sc, p.order, bound));
  }
  for (const auto& s : domain.singularities()) comps.push_back(log_radial(n, s.point, 1e-3 * bound.radius, s.order, bound));

  int m = 64;
  while (m * static_cast<int>(comps.size()) < opts.points) m *= 2;

  std::mt19937_64 rng(opts.seed);
  std::vector<double> reps;
  std::vector<double> u(n + 1), y(n);
  for (int rep = 0; rep < opts.replicates; ++rep) {
    double acc = 0.0;
    for (const auto& comp : comps) {
      ShiftedSobol sob(n + 1, rng());
      for (int i = 0; i < m; ++i) {
        sob.next(u);
        comp.sample(u, y);
        if (!domain.contains(y)) continue;
        double q = 0.0;
        for (const auto& c2 : comps) q += c2.density(y);
        if (!(q > 0.0) || !std::isfinite(q)) continue;
        const double v = f(y) / q;
        if (std::isfinite(v)) acc += v;
      }
    }
    reps.push_back(acc / m);
  }
  const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / reps.size();
  double var = 0.0;
  for (double r : reps) var += (r - mean) * (r - mean);
  var /= std::max<std::size_t>(1, reps.size() - 1);
  QuadratureResult out{mean, 2.0 * std::sqrt(var), QuadMethod::qmc,
                       static_cast<long>(m) * static_cast<long>(comps.size()) * opts.replicates};
  return out;
}

// Radial piece over a ball whose center is at distance d from the radial center.
QuadratureResult radial_over_ball(const Integrand::RadialPiece& piece, int n, const Ball& ball, double tol) {
  const double d = distance(piece.center, ball.center);
  const double R = ball.radius;
  if (d <= 1e-14 * R) return integrate_radial(piece.g, R, n, piece.sigma, tol);
  auto G = [&](double r) {
    const double w = sphere_in_ball_fraction(n, r, d, R);
    return w == 0.0 ? 0.0 : piece.g(r) * w;
  };
  auto res = radial_core(G, n, piece.sigma, d + R, {std::abs(R - d)}, tol);
  res.value *= sphere_area(n);
  res.error_estimate *= sphere_area(n);
  return res;
}

bool disjoint(const std::vector<Ball>& balls) {
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if (distance(balls[i].center, balls[j].center) < balls[i].radius + balls[j].radius) return false;
  return true;
}

// Deterministic radial reduction when the geometry allows it.
std::optional<QuadratureResult> radial_piece(const Integrand::RadialPiece& piece, const Domain& domain,
                                             double tol) {
  const int n = domain.dim();
  return std::visit(
      overloaded{
          [&](const Ball& b) -> std::optional<QuadratureResult> { return radial_over_ball(piece, n, b, tol); },
          [&](const HalfBall& b) -> std::optional<QuadratureResult> {
            if (distance(piece.center, b.center) > 1e-14 * b.radius) return std::nullopt;
            auto r = integrate_radial(piece.g, b.radius, n, piece.sigma, tol);
            r.value *= 0.5;
            r.error_estimate *= 0.5;
            return r;
          },
          [&](const SphereSurface&) -> std::optional<QuadratureResult> { return std::nullopt; },
          [&](const BallMinusBalls& b) -> std::optional<QuadratureResult> {
            if (!disjoint(b.inner)) return std::nullopt;
            auto r = radial_over_ball(piece, n, b.outer, tol);
            for (const auto& in : b.inner) {
              auto ri = radial_over_ball(piece, n, in, tol);
              r.value -= ri.value;
              r.error_estimate += ri.error_estimate;
              r.samples_used += ri.samples_used;
            }
            return r;
          },
          [&](const TruncatedSpace& t) -> std::optional<QuadratureResult> {
            Ball b{Point(t.dim, 0.0), t.r_max};
            if (!t.half) return radial_over_ball(piece, n, b, tol);
            if (std::abs(piece.center[0]) > 1e-14 * t.r_max) return std::nullopt;
            auto r = radial_over_ball(piece, n, b, tol);
            r.value *= 0.5;
            r.error_estimate *= 0.5;
            return r;
          }},
      domain.shape());
}

double tail_bound(const Domain& d) {
  if (auto t = std::get_if<TruncatedSpace>(&d.shape())) return t->tail_bound;
  return 0.0;
}

Point orthogonal_unit(std::span<const double> e) {
  const int n = static_cast<int>(e.size());
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(e[i]) < std::abs(e[best])) best = i;
  Point v = unit_vector(n, best);
  const double de = dot(v, e);
  for (int i = 0; i < n; ++i) v[i] -= de * e[i];
  const double nv = norm(v);
  for (auto& x : v) x /= nv;
  return v;
}

template <int N>
GaussRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  GaussRule r;
  const auto a = G::abscissa();
  const auto w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w[i]);
      continue;
    }
    r.nodes.push_back(a[i]);
    r.weights.push_back(w[i]);
    r.nodes.push_back(-a[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace

Domain::Domain(Shape shape, std::vector<Singularity> singularities)
    : shape_(std::move(shape)), singularities_(std::move(singularities)) {
  const int n = dim();
  std::visit(overloaded{[&](const Ball& b) {
                          if (!(b.radius > 0)) throw ParameterError("ball radius must be positive");
                        },
                        [&](const HalfBall& b) {
                          if (!(b.radius > 0)) throw ParameterError("half-ball radius must be positive");
                        },
                        [&](const SphereSurface& s) {
                          if (!(s.radius > 0)) throw ParameterError("sphere radius must be positive");
                        },
                        [&](const BallMinusBalls& b) {
                          for (const auto& in : b.inner)
                            if (distance(in.center, b.outer.center) + in.radius > b.outer.radius * (1 + 1e-12))
                              throw ParameterError("inner ball not contained in the outer ball");
                        },
                        [&](const TruncatedSpace& t) {
                          if (!(t.r_max > 0) || !std::isfinite(t.r_max))
                            throw ParameterError("truncation radius must be finite and positive");
                        }},
             shape_);
  for (const auto& s : singularities_)
    if (!(s.order < n)) throw ParameterError("singularity order must be below the dimension");
}

int Domain::dim() const {
  return std::visit(overloaded{[](const Ball& b) { return static_cast<int>(b.center.size()); },
                               [](const HalfBall& b) { return static_cast<int>(b.center.size()); },
                               [](const SphereSurface& s) { return static_cast<int>(s.center.size()); },
                               [](const BallMinusBalls& b) { return static_cast<int>(b.outer.center.size()); },
                               [](const TruncatedSpace& t) { return t.dim; }},
                    shape_);
}

bool Domain::contains(std::span<const double> x) const {
  return std::visit(
      overloaded{[&](const Ball& b) { return distance(x, b.center) < b.radius; },
                 [&](const HalfBall& b) { return distance(x, b.center) < b.radius && x[0] > b.center[0]; },
                 [&](const SphereSurface& s) { return std::abs(distance(x, s.center) - s.radius) < 1e-12 * s.radius; },
                 [&](const BallMinusBalls& b) {
                   if (distance(x, b.outer.center) >= b.outer.radius) return false;
                   for (const auto& in : b.inner)
                     if (distance(x, in.center) < in.radius) return false;
                   return true;
                 },
                 [&](const TruncatedSpace& t) { return norm(x) < t.r_max && (!t.half || x[0] > 0.0); }},
      shape_);
}

Ball Domain::bounding_ball() const {
  return std::visit(overloaded{[](const Ball& b) { return b; },
                               [](const HalfBall& b) { return Ball{b.center, b.radius}; },
                               [](const SphereSurface& s) { return Ball{s.center, s.radius}; },
                               [](const BallMinusBalls& b) { return b.outer; },
                               [](const TruncatedSpace& t) { return Ball{Point(t.dim, 0.0), t.r_max}; }},
                    shape_);
}

double Domain::measure() const {
  const int n = dim();
  return std::visit(overloaded{[&](const Ball& b) { return ball_volume(n, b.radius); },
                               [&](const HalfBall& b) { return 0.5 * ball_volume(n, b.radius); },
                               [&](const SphereSurface& s) { return sphere_area(n) * std::pow(s.radius, n - 1); },
                               [&](const BallMinusBalls& b) {
                                 double v = ball_volume(n, b.outer.radius);
                                 for (const auto& in : b.inner) v -= ball_volume(n, in.radius);
                                 return v;
                               },
                               [&](const TruncatedSpace& t) { return (t.half ? 0.5 : 1.0) * ball_volume(n, t.r_max); }},
                    shape_);
}

Integrand::Integrand(ScalarField f, std::vector<Peak> peaks) { add_general(std::move(f), std::move(peaks)); }

Integrand& Integrand::add_radial(Point center, RadialProfile g, double sigma, double scale) {
  radial_.push_back({std::move(center), std::move(g), sigma, scale});
  return *this;
}

Integrand& Integrand::add_general(ScalarField f, std::vector<Peak> peaks) {
  general_.push_back({std::move(f), std::move(peaks)});
  return *this;
}

double Integrand::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& p : radial_) s += p.g(distance(x, p.center));
  for (const auto& p : general_) s += p.f(x);
  return s;
}

QuadratureResult integrate_radial(const RadialProfile& g, double R, int n, double sigma, double tol) {
  if (!(sigma < n)) throw ParameterError("integrate_radial: singularity order must be below the dimension");
  auto res = radial_core(g, n, sigma, R, {}, tol);
  const double w = sphere_area(n);
  res.value *= w;
  res.error_estimate *= w;
  if (res.error_estimate > 1e-6 * std::abs(res.value) + kTiny)
    throw AccuracyError("integrate_radial did not converge", res.value, res.error_estimate);
  return res;
}

QuadratureResult integrate_volume(const Integrand& f, const Domain& domain, const QuadOptions& opts) {
  const int n = domain.dim();
  if (auto s = std::get_if<SphereSurface>(&domain.shape())) {
    ScalarField all = [&](std::span<const double> x) { return f(x); };
    return integrate_surface(all, *s, opts);
  }
  QuadratureResult total;
  total.method = QuadMethod::deterministic_radial;
  std::vector<const Integrand::RadialPiece*> leftover;
  for (const auto& piece : f.radial_pieces()) {
    if (auto r = radial_piece(piece, domain, std::min(opts.tol, 1e-12))) {
      total.value += r->value;
      total.error_estimate += r->error_estimate;
      total.samples_used += r->samples_used;
    } else {
      leftover.push_back(&piece);
    }
  }
  if (!leftover.empty() || !f.general_pieces().empty()) {
    std::vector<Peak> peaks;
    for (const auto* p : leftover) peaks.push_back({p->center, p->scale, p->sigma});
    for (const auto& gp : f.general_pieces()) peaks.insert(peaks.end(), gp.peaks.begin(), gp.peaks.end());
    ScalarField rest = [&](std::span<const double> x) {
      double s = 0.0;
      for (const auto* p : leftover) s += p->g(distance(x, p->center));
      for (const auto& gp : f.general_pieces()) s += gp.f(x);
      return s;
    };
    auto q = qmc_integrate(rest, domain, peaks, opts);
    total.value += q.value;
    total.error_estimate += q.error_estimate;
    total.samples_used += q.samples_used;
    total.method = QuadMethod::qmc;
  }
  total.error_estimate += tail_bound(domain);
  (void)n;
  if (opts.throw_on_inaccuracy && total.error_estimate > opts.tol * std::abs(total.value) + kTiny &&
      total.method == QuadMethod::qmc)
    throw AccuracyError("volume quadrature spread above tolerance", total.value, total.error_estimate);
  return total;
}

QuadratureResult integrate_surface(const ScalarField& f, const SphereSurface& sphere, const QuadOptions& opts) {
  const int n = static_cast<int>(sphere.center.size());
  const double R = sphere.radius;
  const double scale = std::pow(R, n - 1);
  std::vector<double> x(n);
  double fmax = 0.0;
  auto at = [&](std::span<const double> dir) {
    for (int i = 0; i < n; ++i) x[i] = sphere.center[i] + R * dir[i];
    const double v = f(x);
    fmax = std::max(fmax, std::abs(v));
    return v;
  };
  // absolute floor so that vanishing integrals still converge
  auto floor = [&] { return 1e-14 * fmax * sphere_area(n) * scale + kTiny; };
  QuadratureResult out;
  if (n == 2) {
    double prev = NAN;
    for (int N = 16; N <= 65536; N *= 2) {
      double s = 0.0;
      for (int i = 0; i < N; ++i) {
        const double t = 2 * M_PI * i / N;
        const double d[2] = {std::cos(t), std::sin(t)};
        s += at(d);
      }
      s *= 2 * M_PI / N * scale;
      out.samples_used += N;
      if (!std::isnan(prev) && std::abs(s - prev) <= opts.tol * std::abs(s) + floor()) {
        out.value = s;
        out.error_estimate = std::abs(s - prev);
        return out;
      }
      prev = s;
      out.value = s;
      out.error_estimate = INFINITY;
    }
  } else if (n == 3 || n == 4) {
    double prev = NAN;
    for (int N : {8, 16, 32, 64, 128}) {
      if (n == 4 && N > 64) break;
      const auto& g = gauss_legendre(N);
      const int P = 2 * N;
      double s = 0.0;
      std::vector<double> d(n);
      if (n == 3) {
        for (int i = 0; i < N; ++i) {
          const double t = g.nodes[i], st = std::sqrt(1 - t * t);
          for (int j = 0; j < P; ++j) {
            const double ph = 2 * M_PI * j / P;
            d[0] = t;
            d[1] = st * std::cos(ph);
            d[2] = st * std::sin(ph);
            s += g.weights[i] * at(d);
          }
        }
        s *= 2 * M_PI / P;
      } else {
        for (int i = 0; i < N; ++i) {
          const double th = 0.5 * M_PI * (g.nodes[i] + 1), s1 = std::sin(th);
          for (int l = 0; l < N; ++l) {
            const double t2 = g.nodes[l], s2 = std::sqrt(1 - t2 * t2);
            for (int j = 0; j < P; ++j) {
              const double ph = 2 * M_PI * j / P;
              d[0] = std::cos(th);
              d[1] = s1 * t2;
              d[2] = s1 * s2 * std::cos(ph);
              d[3] = s1 * s2 * std::sin(ph);
              s += g.weights[i] * g.weights[l] * s1 * s1 * at(d);
            }
          }
        }
        s *= 0.5 * M_PI * 2 * M_PI / P;
      }
      s *= scale;
      out.samples_used += static_cast<long>(N) * P * (n == 4 ? N : 1);
      if (!std::isnan(prev) && std::abs(s - prev) <= opts.tol * std::abs(s) + floor()) {
        out.value = s;
        out.error_estimate = std::abs(s - prev);
        return out;
      }
      out.value = s;
      out.error_estimate = std::isnan(prev) ? INFINITY : std::abs(s - prev);
      prev = s;
    }
  } else {
    // extend every replicate's sequence until the spread meets tol
    std::mt19937_64 rng(opts.seed);
    std::vector<ShiftedSobol> gens;
    for (int rep = 0; rep < opts.replicates; ++rep) gens.emplace_back(n, rng());
    std::vector<double> acc(opts.replicates, 0.0), u(n), d(n);
    long count = 0;
    for (long target = opts.points;; target *= 2) {
      for (int rep = 0; rep < opts.replicates; ++rep)
        for (long i = count; i < target; ++i) {
          gens[rep].next(u);
          uniforms_to_sphere(u, d);
          acc[rep] += at(d);
        }
      count = target;
      std::vector<double> reps;
      for (double a : acc) reps.push_back(a / count * sphere_area(n) * scale);
      const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / reps.size();
      double var = 0.0;
      for (double r : reps) var += (r - mean) * (r - mean);
      var /= std::max<std::size_t>(1, reps.size() - 1);
      out = {mean, 2.0 * std::sqrt(var), QuadMethod::qmc, count * opts.replicates};
      if (out.error_estimate <= opts.tol * std::abs(mean) + floor()) return out;
      if (count >= (1L << 18)) break;
    }
    if (opts.throw_on_inaccuracy)
      throw AccuracyError("surface quadrature spread above tolerance", out.value, out.error_estimate);
    return out;
  }
  if (opts.throw_on_inaccuracy)
    throw AccuracyError("surface quadrature did not converge", out.value, out.error_estimate);
  return out;
}

namespace {

// Successive Gauss levels. Once the differences shrink, the latest one
// overestimates the error of the finer rule, so it is damped by the contraction.
class Refinement {
 public:
  bool accept(const std::vector<double>& cur, long used, double tol, std::vector<QuadratureResult>& out) {
    bool ok = !prev_.empty();
    if (ok) {
      double big = 0.0;
      for (double v : cur) big = std::max(big, std::abs(v));
      for (std::size_t o = 0; o < cur.size(); ++o) {
        const double d2 = std::abs(cur[o] - prev_[o]);
        double err = d2;
        if (!diff_.empty() && diff_[o] > 0.0) err = d2 * std::min(1.0, d2 / diff_[o]);
        out[o] = {cur[o], err, QuadMethod::deterministic_axial, used};
        if (err > tol * std::abs(cur[o]) + 1e-14 * big + kTiny) ok = false;
      }
      diff_.resize(cur.size());
      for (std::size_t o = 0; o < cur.size(); ++o) diff_[o] = std::abs(cur[o] - prev_[o]);
    }
    prev_ = cur;
    return ok;
  }

 private:
  std::vector<double> prev_, diff_;
};

}  // namespace

std::vector<QuadratureResult> integrate_axial_shell(const VectorField& f, int outputs, int n,
                                                    std::span<const double> center,
                                                    std::span<const double> direction, double r_in,
                                                    double r_out, double tol, int panels) {
  Point e(direction.begin(), direction.end());
  const double ne = norm(e);
  for (auto& v : e) v /= ne;
  const Point p = orthogonal_unit(e);
  const double omega = n == 2 ? 2.0 : sphere_area(n - 1);
  std::vector<double> x(n), vals(outputs);
  std::vector<double> cur;
  Refinement levels;
  std::vector<QuadratureResult> out(outputs);
  long used = 0;
  const double hr = (r_out - r_in) / panels, hth = M_PI / panels;
  for (int N : {16, 32, 64, 128}) {
    if (panels > 1 && N > 64) break;
    const auto& g = gauss_legendre(N);
    std::vector<double> rs, wr, ths, wt;
    for (int P = 0; P < panels; ++P)
      for (int i = 0; i < N; ++i) {
        const double r = r_in + hr * (P + 0.5 * (g.nodes[i] + 1));
        rs.push_back(r);
        wr.push_back(0.5 * hr * g.weights[i] * std::pow(r, n - 1));
        const double th = hth * (P + 0.5 * (g.nodes[i] + 1));
        ths.push_back(th);
        wt.push_back(0.5 * hth * g.weights[i] * std::pow(std::sin(th), n - 2));
      }
    cur.assign(outputs, 0.0);
    for (std::size_t i = 0; i < rs.size(); ++i)
      for (std::size_t j = 0; j < ths.size(); ++j) {
        for (int c = 0; c < n; ++c) x[c] = center[c] + rs[i] * (std::cos(ths[j]) * e[c] + std::sin(ths[j]) * p[c]);
        std::fill(vals.begin(), vals.end(), 0.0);
        f(x, vals);
        for (int o = 0; o < outputs; ++o) cur[o] += omega * wr[i] * wt[j] * vals[o];
      }
    used += static_cast<long>(rs.size() * ths.size());
    if (levels.accept(cur, used, tol, out)) return out;
  }
  return out;
}

std::vector<QuadratureResult> integrate_axial_sphere(const VectorField& f, int outputs, int n,
                                                     std::span<const double> center,
                                                     std::span<const double> direction, double radius,
                                                     double tol) {
  Point e(direction.begin(), direction.end());
  const double ne = norm(e);
  for (auto& v : e) v /= ne;
  const Point p = orthogonal_unit(e);
  const double omega = (n == 2 ? 2.0 : sphere_area(n - 1)) * std::pow(radius, n - 1);
  std::vector<double> x(n), vals(outputs);
  std::vector<double> cur;
  Refinement levels;
  std::vector<QuadratureResult> out(outputs);
  long used = 0;
  for (int N : {16, 32, 64, 128, 256}) {
    const auto& g = gauss_legendre(N);
    cur.assign(outputs, 0.0);
    for (int j = 0; j < N; ++j) {
      const double th = 0.5 * M_PI * (g.nodes[j] + 1);
      const double wt = 0.5 * M_PI * g.weights[j] * std::pow(std::sin(th), n - 2);
      for (int c = 0; c < n; ++c) x[c] = center[c] + radius * (std::cos(th) * e[c] + std::sin(th) * p[c]);
      std::fill(vals.begin(), vals.end(), 0.0);
      f(x, vals);
      for (int o = 0; o < outputs; ++o) cur[o] += omega * wt * vals[o];
    }
    used += N;
    if (levels.accept(cur, used, tol, out)) return out;
  }
  return out;
}

std::vector<QuadratureResult> integrate_axial_cylinder(const VectorField& f, int outputs, int n,
                                                       std::span<const double> base,
                                                       std::span<const double> direction, double t0,
                                                       double t1, double rho_max, double tol, int panels) {
  Point e(direction.begin(), direction.end());
  const double ne = norm(e);
  for (auto& v : e) v /= ne;
  const Point p = orthogonal_unit(e);
  const double omega = n == 2 ? 2.0 : sphere_area(n - 1);
  std::vector<double> x(n), vals(outputs);
  std::vector<double> cur;
  Refinement levels;
  std::vector<QuadratureResult> out(outputs);
  long used = 0;
  const double ht = (t1 - t0) / panels, hr = rho_max / panels;
  for (int N : {8, 16, 32, 64}) {
    const auto& g = gauss_legendre(N);
    std::vector<double> ts, wt, rs, wr;
    for (int P = 0; P < panels; ++P)
      for (int i = 0; i < N; ++i) {
        ts.push_back(t0 + ht * (P + 0.5 * (g.nodes[i] + 1)));
        wt.push_back(0.5 * ht * g.weights[i]);
        const double r = hr * (P + 0.5 * (g.nodes[i] + 1));
        rs.push_back(r);
        wr.push_back(0.5 * hr * g.weights[i] * omega * std::pow(r, n - 2));
      }
    cur.assign(outputs, 0.0);
    for (std::size_t i = 0; i < ts.size(); ++i)
      for (std::size_t j = 0; j < rs.size(); ++j) {
        for (int c = 0; c < n; ++c) x[c] = base[c] + ts[i] * e[c] + rs[j] * p[c];
        std::fill(vals.begin(), vals.end(), 0.0);
        f(x, vals);
        for (int o = 0; o < outputs; ++o) cur[o] += wt[i] * wr[j] * vals[o];
      }
    used += static_cast<long>(ts.size() * rs.size());
    if (levels.accept(cur, used, tol, out)) return out;
  }
  return out;
}

double sphere_cap_fraction(int n, double cos_theta) {
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  const double s2 = 1.0 - c * c;
  const double half = s2 <= 0.0 ? 0.0 : 0.5 * boost::math::ibeta(0.5 * (n - 1), 0.5, s2);
  return c >= 0.0 ? half : 1.0 - half;
}

double sphere_in_ball_fraction(int n, double r, double d, double R) {
  if (r <= 0.0) return d < R ? 1.0 : 0.0;
  if (d + r <= R) return 1.0;
  if (r >= d + R || d >= r + R) return 0.0;
  return sphere_cap_fraction(n, (r * r + d * d - R * R) / (2.0 * r * d));
}

const GaussRule& gauss_legendre(int N) {
  static const GaussRule r8 = make_rule<8>(), r16 = make_rule<16>(), r32 = make_rule<32>(), r64 = make_rule<64>(),
                         r128 = make_rule<128>(), r256 = make_rule<256>();
  switch (N) {
    case 8: return r8;
    case 16: return r16;
    case 32: return r32;
    case 64: return r64;
    case 128: return r128;
    case 256: return r256;
    default: throw ParameterError("gauss_legendre: unsupported rule size " + std::to_string(N));
  }
}

struct ShiftedSobol::Impl {
  boost::random::sobol gen;
  std::vector<std::uint64_t> shift;
  Impl(int dim, std::uint64_t seed) : gen(dim), shift(dim) {
    std::mt19937_64 rng(seed);
    for (auto& s : shift) s = rng();
  }
};

ShiftedSobol::ShiftedSobol(int dim, std::uint64_t seed) : dim_(dim), impl_(std::make_unique<Impl>(dim, seed)) {}
ShiftedSobol::~ShiftedSobol() = default;
ShiftedSobol::ShiftedSobol(ShiftedSobol&&) noexcept = default;
ShiftedSobol& ShiftedSobol::operator=(ShiftedSobol&&) noexcept = default;

void ShiftedSobol::next(std::span<double> out) {
  for (int i = 0; i < dim_; ++i) {
    const std::uint64_t v = impl_->gen() ^ impl_->shift[i];
    out[i] = (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
  }
}

void uniforms_to_sphere(std::span<const double> u, std::span<double> out) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u[i] - 1.0);
    s += out[i] * out[i];
  }
  s = std::sqrt(s);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] /= s;
}

}  // namespace polycrit
