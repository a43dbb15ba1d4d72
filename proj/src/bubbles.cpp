#include "polycrit/bubbles.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "polycrit/errors.hpp"
#include "polycrit/radialgebra.hpp"

namespace polycrit {

namespace {

double half_decay(int n, int k) { return 0.5 * (n - 2 * k); }

const Ball& ball_of(const Domain& omega) {
  const auto* b = std::get_if<Ball>(&omega.shape());
  if (!b) throw UnsupportedError("bubbles are only supported on ball domains");
  return *b;
}

double interior_distance(const BubbleSpec& spec, const Ball& omega) {
  const double d = omega.radius - distance(spec.center, omega.center);
  if (!(d > 0.0)) throw ParameterError("interior bubble center must lie inside the domain");
  return d;
}

double profile_value(const BubbleSpec& spec, std::span<const double> y) {
  if (spec.standard()) return standard_bubble(spec.n, spec.k, norm(y));
  return spec.profile->value(y);
}

// Series of the profile at y0 + dx / mu.
Taylor profile_series(const BubbleSpec& spec, std::span<const Taylor> X, std::span<const double> y0) {
  const auto& set = X[0].set_ptr();
  const int n = spec.n;
  if (spec.standard()) {
    Taylor y2(set);
    for (int i = 0; i < n; ++i) {
      Taylor yi = (X[i] - spec.center[i]) * (1.0 / spec.mu);
      y2 += yi * yi;
    }
    return pow(1.0 + bubble_constant(n, spec.k) * y2, -half_decay(n, spec.k));
  }
  const Jet J = spec.profile->jet(y0, set->order());
  Taylor t(set);
  for (int i = 0; i < set->size(); ++i)
    t[i] = J.partials()[i] / set->factorial(i) * std::pow(spec.mu, -set->degree(i));
  return t;
}

}  // namespace

void BubbleSpec::validate() const {
  if (k < 1 || n <= 2 * k) throw ParameterError("bubble needs 1 <= k and n > 2k");
  if (static_cast<int>(center.size()) != n) throw ParameterError("bubble center has the wrong dimension");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("bubble scale must be positive");
  if (profile && profile->dim() != n) throw ParameterError("profile dimension mismatch");
}

std::string to_json(const BubbleSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind == BubbleKind::interior ? "interior" : "boundary";
  j["n"] = spec.n;
  j["k"] = spec.k;
  j["center"] = spec.center;
  j["mu"] = spec.mu;
  j["profile"] = spec.standard() ? "standard" : "external";
  return j.dump();
}

BubbleSpec bubble_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("bubble json: ") + e.what());
  }
  BubbleSpec s;
  const std::string kind = j.value("kind", "interior");
  if (kind == "interior")
    s.kind = BubbleKind::interior;
  else if (kind == "boundary")
    s.kind = BubbleKind::boundary;
  else
    throw ParameterError("bubble json: unknown kind " + kind);
  s.n = j.at("n").get<int>();
  s.k = j.at("k").get<int>();
  s.center = j.at("center").get<Point>();
  s.mu = j.at("mu").get<double>();
  if (j.value("profile", "standard") != "standard")
    throw ParameterError("bubble json: external profiles must be attached in code");
  s.validate();
  return s;
}

double standard_bubble(int n, int k, double r) {
  return std::pow(1.0 + bubble_constant(n, k) * r * r, -half_decay(n, k));
}

double theta(const BubbleSpec& spec, std::span<const double> x) { return spec.mu + distance(x, spec.center); }

double positive_bubble(const BubbleSpec& spec, std::span<const double> x) {
  const double r = distance(x, spec.center);
  const double a = bubble_constant(spec.n, spec.k);
  return std::pow(spec.mu / (spec.mu * spec.mu + a * r * r), half_decay(spec.n, spec.k));
}

double positive_bubble(std::span<const BubbleSpec> bubbles, int index, std::span<const double> x) {
  if (index == 0) return 1.0;
  if (index < 0 || index > static_cast<int>(bubbles.size())) throw ParameterError("bubble index out of range");
  return positive_bubble(bubbles[index - 1], x);
}

double cutoff(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double t = 2.0 * r - 1.0;
  const double e = 1.0 / (1.0 - t) - 1.0 / t;
  if (e > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(e));
}

Taylor cutoff(const Taylor& z2) {
  const double r = std::sqrt(std::max(0.0, z2.value()));
  if (r <= 0.5) return Taylor(z2.set_ptr(), 1.0);
  if (r >= 1.0) return Taylor(z2.set_ptr(), 0.0);
  const Taylor t = 2.0 * sqrt(z2) - 1.0;
  const Taylor e = 1.0 / (1.0 - t) - 1.0 / t;
  if (e.value() > 700.0) return Taylor(z2.set_ptr(), 0.0);
  return 1.0 / (1.0 + exp(e));
}

BoundaryChart::BoundaryChart(const Ball& omega, std::span<const double> boundary_point) : omega_(omega) {
  const int n = static_cast<int>(omega.center.size());
  nu_ = subtract(boundary_point, omega.center);
  const double r = norm(nu_);
  if (std::abs(r - omega.radius) > 1e-12 * omega.radius)
    throw ParameterError("boundary bubble center must lie on the boundary");
  for (auto& v : nu_) v /= r;
  std::vector<Point> basis{nu_};
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    Point e = unit_vector(n, i);
    for (const auto& b : basis) {
      const double c = dot(e, b);
      for (int m = 0; m < n; ++m) e[m] -= c * b[m];
    }
    const double ne = norm(e);
    if (ne < 1e-8) continue;
    for (auto& v : e) v /= ne;
    basis.push_back(e);
  }
  tangents_.assign(basis.begin() + 1, basis.end());
}

Point BoundaryChart::to_ball(std::span<const double> z) const {
  const int n = static_cast<int>(nu_.size());
  const double R = omega_.radius;
  double tz = 0.0;
  for (int j = 1; j < n; ++j) tz += z[j] * z[j];
  tz = std::sqrt(tz);
  const double phi = tz / R;
  Point dir(n);
  for (int m = 0; m < n; ++m) dir[m] = std::cos(phi) * nu_[m];
  if (tz > 0.0)
    for (int j = 1; j < n; ++j)
      for (int m = 0; m < n; ++m) dir[m] += std::sin(phi) * z[j] / tz * tangents_[j - 1][m];
  Point x(n);
  for (int m = 0; m < n; ++m) x[m] = omega_.center[m] + (R - z[0]) * dir[m];
  return x;
}

Point BoundaryChart::to_chart(std::span<const double> x) const {
  const int n = static_cast<int>(nu_.size());
  const double R = omega_.radius;
  Point v = subtract(x, omega_.center);
  const double rho = norm(v);
  Point z(n, 0.0);
  z[0] = R - rho;
  if (rho == 0.0) return z;
  double s2 = 0.0;
  std::vector<double> t(n - 1);
  for (int j = 0; j < n - 1; ++j) {
    t[j] = dot(v, tangents_[j]) / rho;
    s2 += t[j] * t[j];
  }
  const double s = std::sqrt(s2);
  const double phi = std::atan2(s, dot(v, nu_) / rho);
  if (s > 0.0)
    for (int j = 0; j < n - 1; ++j) z[j + 1] = R * phi * t[j] / s;
  else if (phi > 0.0)
    z[1] = R * phi;  // antipode: every direction is at arc length pi R
  return z;
}

double eval_V(const BubbleSpec& spec, std::span<const double> x, const Domain& omega) {
  spec.validate();
  const Ball& ball = ball_of(omega);
  const double scale = std::pow(spec.mu, -half_decay(spec.n, spec.k));
  if (spec.kind == BubbleKind::interior) {
    const double d = interior_distance(spec, ball);
    const double chi = cutoff(distance(x, spec.center) / d);
    if (chi == 0.0) return 0.0;
    Point y = subtract(x, spec.center);
    for (auto& v : y) v /= spec.mu;
    return chi * scale * profile_value(spec, y);
  }
  if (ball.radius < 1.0) throw UnsupportedError("boundary chart needs a ball of radius at least 1");
  if (distance(x, ball.center) > ball.radius) return 0.0;
  const BoundaryChart chart(ball, spec.center);
  Point z = chart.to_chart(x);
  const double chi = cutoff(norm(z));
  if (chi == 0.0) return 0.0;
  for (auto& v : z) v /= spec.mu;
  return chi * scale * profile_value(spec, z);
}

Jet bubble_jet(const BubbleSpec& spec, std::span<const double> x, int order, const Domain& omega) {
  spec.validate();
  if (order < 0 || order > 2 * spec.k) throw ParameterError("bubble_jet: order must lie in [0, 2k]");
  if (spec.kind == BubbleKind::boundary) throw UnsupportedError("jets of boundary bubbles are not available");
  const Ball& ball = ball_of(omega);
  const double d = interior_distance(spec, ball);
  auto X = Taylor::variables(x, order);
  Taylor z2(X[0].set_ptr());
  for (int i = 0; i < spec.n; ++i) {
    Taylor zi = (X[i] - spec.center[i]) * (1.0 / d);
    z2 += zi * zi;
  }
  const Taylor chi = cutoff(z2);
  if (chi.value() == 0.0 && std::sqrt(z2.value()) >= 1.0) return Jet::from_taylor(chi);
  Point y = subtract(x, spec.center);
  for (auto& v : y) v /= spec.mu;
  Taylor v = profile_series(spec, X, y) * std::pow(spec.mu, -half_decay(spec.n, spec.k));
  return Jet::from_taylor(chi * v);
}

DecayReport check_decay(int n, int k, int l, std::span<const double> radii) {
  if (k < 1 || n <= 2 * k) throw ParameterError("check_decay needs n > 2k");
  if (l < 0 || l > 2 * k) throw ParameterError("check_decay: l must lie in [0, 2k]");
  if (radii.size() < 2) throw ParameterError("check_decay needs at least two radii");
  const double a = bubble_constant(n, k);
  std::vector<double> lx, ly;
  for (double r : radii) {
    Point x(n, 0.0);
    x[0] = r;
    auto X = Taylor::variables(x, l);
    Taylor s(X[0].set_ptr());
    for (const auto& xi : X) s += xi * xi;
    const Jet J = Jet::from_taylor(pow(1.0 + a * s, -half_decay(n, k)));
    lx.push_back(std::log(r));
    ly.push_back(std::log(J.tensor_norm(l)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  const double expected = 2 * k - n - l;
  return {l, slope, expected, std::abs(slope - expected)};
}

std::vector<std::shared_ptr<JetProvider>> kernel_elements(int n, int k) {
  if (k < 1 || n <= 2 * k) throw ParameterError("kernel_elements needs n > 2k");
  const double a = bubble_constant(n, k);
  const double q = half_decay(n, k);
  auto r2 = [](std::span<const Taylor> x) {
    Taylor s(x[0].set_ptr());
    for (const auto& xi : x) s += xi * xi;
    return s;
  };
  std::vector<std::shared_ptr<JetProvider>> out;
  const Point origin(n, 0.0);
  out.push_back(std::make_shared<TaylorJetProvider>(
      n, 64,
      [=](std::span<const Taylor> x) {
        const Taylor s = r2(x);
        return q * (1.0 - a * s) * pow(1.0 + a * s, -q - 1.0);
      },
      Symmetry{Symmetry::Kind::radial, origin, unit_vector(n, 0)}));
  for (int i = 0; i < n; ++i)
    out.push_back(std::make_shared<TaylorJetProvider>(
        n, 64,
        [=](std::span<const Taylor> x) { return (-2.0 * q * a) * x[i] * pow(1.0 + a * r2(x), -q - 1.0); },
        Symmetry{Symmetry::Kind::axial, origin, unit_vector(n, i)}));
  return out;
}

double compute_IA(const LowerOrderTensor& A, int n, int k, int p, bool half_space, double mu) {
  if (k < 1 || n <= 2 * k) throw ParameterError("compute_IA needs n > 2k");
  if (p < 0 || p > k - 1) throw ParameterError("compute_IA needs 0 <= p <= k - 1");
  if (p > 2) throw ParameterError("compute_IA supports p <= 2");
  if (!(mu > 0.0)) throw ParameterError("compute_IA: scale must be positive");
  if (n <= 4 * k - 2 * p) throw DivergentIntegralError("I_A diverges unless n > 4k - 2p");
  if (A.kind == LowerOrderTensor::Kind::diagonal) {
    const std::size_t want = p == 0 ? 1 : static_cast<std::size_t>(n);
    if (A.diag.size() != want) throw ParameterError("diagonal tensor has the wrong size");
  }

  const double a = bubble_constant(n, k);
  const RadialFunction B = make_bubble(n, k);
  const RadialFunction B1 = radial_derivative(B);
  double value = 0.0;
  if (p == 0) {
    const double c = A.kind == LowerOrderTensor::Kind::isotropic ? A.lambda : A.diag[0];
    value = c * (B * B).integrate(a);
  } else if (p == 1) {
    double c = A.lambda;
    if (A.kind == LowerOrderTensor::Kind::diagonal) {
      c = 0.0;
      for (double v : A.diag) c += v;
      c /= n;
    }
    value = c * (B1 * B1).integrate(a);
  } else {
    // Hessian of a radial function: alpha w w^T + beta I, alpha = B'' - B'/r, beta = B'/r.
    const RadialFunction beta = divide_by_r(B1);
    const RadialFunction alpha = radial_derivative(B1) - beta;
    const double jaa = (alpha * alpha).integrate(a);
    const double jab = (alpha * beta).integrate(a);
    const double jbb = (beta * beta).integrate(a);
    if (A.kind == LowerOrderTensor::Kind::isotropic) {
      value = A.lambda * (jaa + 2.0 * jab + n * jbb);
    } else {
      double s1 = 0.0, s2 = 0.0;
      for (double v : A.diag) {
        s1 += v;
        s2 += v * v;
      }
      value = jaa * (s1 * s1 + 2.0 * s2) / (n * (n + 2.0)) + 2.0 * jab * s2 / n + jbb * s2;
    }
  }
  value *= std::pow(mu, 2.0 * (k - p));
  return half_space ? 0.5 * value : value;
}

SignReport check_sign_condition(std::span<const LowerOrderTensor> samples, int n, int k, int p) {
  SignReport rep{SignVerdict::violated, {}, -1};
  for (const auto& A : samples) {
    rep.values.push_back(compute_IA(A, n, k, p, false));
    rep.values.push_back(compute_IA(A, n, k, p, true));
  }
  if (rep.values.empty()) return rep;
  const bool positive = rep.values[0] > 0.0;
  for (std::size_t i = 0; i < rep.values.size(); ++i) {
    const double v = rep.values[i];
    if (v == 0.0 || (v > 0.0) != positive) {
      rep.witness = static_cast<int>(i);
      return rep;
    }
  }
  rep.verdict = positive ? SignVerdict::positive : SignVerdict::negative;
  return rep;
}

}  // namespace polycrit
