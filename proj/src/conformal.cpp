#include "polycrit/conformal.hpp"

#include <cmath>
#include <functional>

#include "polycrit/errors.hpp"
#include "polycrit/quad.hpp"

namespace polycrit {

namespace {

void require_regular(std::span<const double> y) {
  double s = (y[0] + 1.0) * (y[0] + 1.0);
  for (std::size_t i = 1; i < y.size(); ++i) s += y[i] * y[i];
  if (s == 0.0) throw SingularPointError("Cayley map is singular at -e_1");
}

double shifted_norm2(std::span<const double> y) {
  double s = (y[0] + 1.0) * (y[0] + 1.0);
  for (std::size_t i = 1; i < y.size(); ++i) s += y[i] * y[i];
  return s;
}

double energy_density(const Jet& J, int k) {
  if (k % 2 == 0) return std::pow(J.laplacian_power(k / 2), 2);
  const Point g = J.grad_laplacian_power(k / 2);
  return dot(g, g);
}

// (-Delta)^k f(y) by nested second differences.
double fd_polylap(const std::function<double(const Point&)>& f, const Point& y, int k, double h) {
  if (k == 0) return f(y);
  const double c = fd_polylap(f, y, k - 1, h);
  double s = 0.0;
  Point z = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    z[i] = y[i] + h;
    s += fd_polylap(f, z, k - 1, h);
    z[i] = y[i] - h;
    s += fd_polylap(f, z, k - 1, h);
    z[i] = y[i];
    s -= 2.0 * c;
  }
  return -s / (h * h);
}

bool on_e1_axis(const Symmetry& s, int n) {
  if (s.kind == Symmetry::Kind::none) return false;
  for (int i = 1; i < n; ++i)
    if (std::abs(s.point[i]) > 1e-14) return false;
  if (s.kind == Symmetry::Kind::radial) return true;
  for (int i = 1; i < n; ++i)
    if (std::abs(s.direction[i]) > 1e-14 * norm(s.direction)) return false;
  return true;
}

IntegralPair make_pair(double lhs, double elhs, double rhs, double erhs) {
  IntegralPair p;
  p.lhs = lhs;
  p.rhs = rhs;
  p.error_estimate = elhs + erhs;
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  p.rel_error = scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
  return p;
}

}  // namespace

Point phi(std::span<const double> y) {
  require_regular(y);
  const double s = shifted_norm2(y);
  Point x(y.begin(), y.end());
  x[0] += 1.0;
  for (auto& v : x) v /= s;
  x[0] -= 0.5;
  return x;
}

std::vector<Taylor> phi(std::span<const Taylor> y) {
  std::vector<Taylor> w(y.begin(), y.end());
  w[0] += 1.0;
  Taylor s(y[0].set_ptr());
  for (const auto& v : w) s += v * v;
  if (s.value() == 0.0) throw SingularPointError("Cayley map is singular at -e_1");
  const Taylor inv = reciprocal(s);
  for (auto& v : w) v = v * inv;
  w[0] += -0.5;
  return w;
}

Point phi_inv(std::span<const double> x) {
  Point y(x.begin(), x.end());
  y[0] += 0.5;
  const double s = dot(y, y);
  if (s == 0.0) throw SingularPointError("inverse Cayley map is singular at -e_1/2");
  for (auto& v : y) v /= s;
  y[0] -= 1.0;
  return y;
}

std::vector<double> phi_jacobian(std::span<const double> y) {
  require_regular(y);
  const int n = static_cast<int>(y.size());
  Point w(y.begin(), y.end());
  w[0] += 1.0;
  const double s = dot(w, w);
  std::vector<double> D(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D[i * n + j] = ((i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j] / s) / s;
  return D;
}

double cayley_transform(const JetProvider& u, int k, std::span<const double> y) {
  const int n = static_cast<int>(y.size());
  const Point x = phi(y);
  return std::pow(shifted_norm2(y), 0.5 * (2 * k - n)) * u.value(x);
}

Jet cayley_jet(const JetProvider& u, int k, std::span<const double> y, int order) {
  const int n = static_cast<int>(y.size());
  if (u.dim() != n) throw ParameterError("cayley_jet: dimension mismatch");
  require_regular(y);
  auto Y = Taylor::variables(y, order);
  const auto P = phi(Y);
  Point x(n);
  for (int i = 0; i < n; ++i) x[i] = P[i].value();
  Taylor w2(Y[0].set_ptr());
  for (int i = 0; i < n; ++i) {
    Taylor wi = i == 0 ? Y[0] + 1.0 : Y[i];
    w2 += wi * wi;
  }
  const Taylor composed = compose(u.jet(x, order), P);
  return Jet::from_taylor(pow(w2, 0.5 * (2 * k - n)) * composed);
}

double check_distance_identity(std::span<const double> x, std::span<const double> y) {
  const double lhs = distance(phi(x), phi(y)) * std::sqrt(shifted_norm2(x)) * std::sqrt(shifted_norm2(y));
  return std::abs(lhs - distance(x, y));
}

NormInvarianceReport check_norm_invariance(const JetProvider& u, int k, const NormInvarianceOptions& opts) {
  const int n = u.dim();
  if (k < 1 || n <= 2 * k) throw ParameterError("check_norm_invariance needs n > 2k");
  if (u.smoothness() < k) throw ParameterError("provider is not smooth enough for the energy");
  const double crit = 2.0 * n / (n - 2 * k);
  const Point origin(n, 0.0), e1 = unit_vector(n, 0);

  auto ball_field = [&](std::span<const double> y, std::span<double> out) {
    if (dot(y, y) >= 1.0) return;
    const Jet J = cayley_jet(u, k, y, k);
    out[0] = std::pow(std::abs(J.value()), crit);
    out[1] = energy_density(J, k);
  };
  auto half_field = [&](std::span<const double> x, std::span<double> out) {
    if (x[0] <= 0.0) return;
    const Jet J = u.jet(x, k);
    out[0] = std::pow(std::abs(J.value()), crit);
    out[1] = energy_density(J, k);
  };

  double b[2], eb[2], h[2], eh[2];
  if (on_e1_axis(u.symmetry(), n)) {
    auto rb = integrate_axial_shell(ball_field, 2, n, origin, e1, 0.0, 1.0, opts.tol, 4);
    auto rh = integrate_axial_cylinder(half_field, 2, n, origin, e1, 0.0, opts.radius, opts.radius, opts.tol);
    for (int i = 0; i < 2; ++i) {
      b[i] = rb[i].value;
      eb[i] = rb[i].error_estimate;
      h[i] = rh[i].value;
      eh[i] = rh[i].error_estimate;
    }
  } else {
    QuadOptions q;
    q.tol = opts.tol;
    q.seed = opts.seed;
    q.throw_on_inaccuracy = false;
    for (int i = 0; i < 2; ++i) {
      auto pick = [&, i](auto& field) {
        return [&, i](std::span<const double> x) {
          double out[2] = {0.0, 0.0};
          field(x, out);
          return out[i];
        };
      };
      auto rb = integrate_volume(Integrand(pick(ball_field)), Domain(Ball{origin, 1.0}), q);
      auto rh = integrate_volume(Integrand(pick(half_field)), Domain(TruncatedSpace{n, opts.radius, true}), q);
      b[i] = rb.value;
      eb[i] = rb.error_estimate;
      h[i] = rh.value;
      eh[i] = rh.error_estimate;
    }
  }
  NormInvarianceReport rep{make_pair(b[0], eb[0], h[0], eh[0]), make_pair(b[1], eb[1], h[1], eh[1])};
  for (const auto* p : {&rep.critical, &rep.energy})
    if (p->error_estimate > opts.tol * std::max(std::abs(p->lhs), std::abs(p->rhs)) + 1e-300)
      throw AccuracyError("norm invariance quadrature did not reach the tolerance", p->lhs, p->error_estimate);
  return rep;
}

ConjugationReport check_laplacian_conjugation(const JetProvider& v, int k, std::span<const double> y, double h) {
  const int n = v.dim();
  if (static_cast<int>(y.size()) != n) throw ParameterError("check_laplacian_conjugation: dimension mismatch");
  require_regular(y);
  const double sy = std::sqrt(shifted_norm2(y));
  if (h <= 0.0) h = 1e-3 * (1.0 + sy);
  ConjugationReport rep{};
  rep.h = h;
  rep.ill_conditioned = sy < 1e-2;
  rep.lhs_exact = cayley_jet(v, k, y, 2 * k).laplacian_power(k);
  rep.rhs = std::pow(sy, -n - 2.0 * k) * v.jet(phi(y), 2 * k).laplacian_power(k);
  auto star = [&](const Point& p) { return cayley_transform(v, k, p); };
  const Point yp(y.begin(), y.end());
  const double coarse = fd_polylap(star, yp, k, h);
  const double fine = fd_polylap(star, yp, k, 0.5 * h);
  rep.lhs_fd = (4.0 * fine - coarse) / 3.0;
  rep.fd_error = std::abs(fine - coarse) / 3.0;
  rep.exact_residual = std::abs(rep.lhs_exact - rep.rhs);
  rep.fd_residual = std::abs(rep.lhs_fd - rep.rhs);
  rep.fd_residual_h = std::abs(coarse - rep.rhs);
  return rep;
}

}  // namespace polycrit
