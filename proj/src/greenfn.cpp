#include "polycrit/greenfn.hpp"

#include <cmath>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>

#include "polycrit/conformal.hpp"
#include "polycrit/errors.hpp"
#include "polycrit/geometry.hpp"

namespace polycrit {

namespace {

double distance2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  if (d2 == 0.0) throw SingularPointError("Green's function is singular on the diagonal");
  return d2;
}

void check_ball(std::span<const double> x) {
  if (dot(x, x) > 1.0 + 1e-14) throw ParameterError("point outside the unit ball");
}

void check_half(std::span<const double> x) {
  if (x.empty() || x[0] < 0.0) throw ParameterError("point outside the half-space");
}

// Near s = 1 the binomial closed form cancels; expand in h = t - 1 instead:
// (t^2 - 1)^{k-1} t^{1-n} = h^{k-1} (2 + h)^{k-1} (1 + h)^{1-n}.
double kernel_series(double delta, int k, int n) {
  std::vector<double> poly(k);
  for (int j = 0; j < k; ++j)
    poly[j] = boost::math::binomial_coefficient<double>(k - 1, j) * std::pow(2.0, k - 1 - j);
  double sum = 0.0, dm = std::pow(delta, k);
  for (int m = 0; m < 2000; ++m) {
    // coefficient of h^m in (2 + h)^{k-1} (1 + h)^{1-n}
    double c = 0.0, b = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (m - i < k) c += poly[m - i] * b;
      b *= -(n - 1.0 + i) / (i + 1.0);
    }
    const double term = c * dm / (k + m);
    sum += term;
    if (m > k && std::abs(term) < 1e-18 * std::abs(sum)) break;
    dm *= delta;
  }
  return sum;
}

}  // namespace

double psi_ball(std::span<const double> x, std::span<const double> y) {
  check_ball(x);
  check_ball(y);
  return (1.0 - dot(x, x)) * (1.0 - dot(y, y)) / distance2(x, y);
}

double psi_half(std::span<const double> x, std::span<const double> y) {
  check_half(x);
  check_half(y);
  return 4.0 * x[0] * y[0] / distance2(x, y);
}

double kernel_integral(double s, int k, int n) {
  if (k < 1 || n <= 2 * k) throw ParameterError("kernel_integral needs k >= 1 and n > 2k");
  if (!(s >= 1.0)) throw ParameterError("kernel_integral needs s >= 1");
  if (s - 1.0 <= 0.5) return kernel_series(s - 1.0, k, n);
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    const double c = boost::math::binomial_coefficient<double>(k - 1, j) * ((k - 1 - j) % 2 ? -1.0 : 1.0);
    const int e = 2 * j + 2 - n;
    if (e == 0)
      sum += c * std::log(s);
    else
      sum += c * ((std::isinf(s) ? (e < 0 ? 0.0 : s) : std::pow(s, e)) - 1.0) / e;
  }
  return sum;
}

GreenEval green_ball(std::span<const double> x, std::span<const double> y, int k) {
  const int n = static_cast<int>(x.size());
  const double p = psi_ball(x, y);
  return {n, k, 1.0, std::pow(distance2(x, y), 0.5 * (2 * k - n)) * kernel_integral(std::sqrt(1.0 + p), k, n)};
}

GreenEval green_half(std::span<const double> x, std::span<const double> y, int k) {
  const int n = static_cast<int>(x.size());
  const double p = psi_half(x, y);
  return {n, k, 1.0, std::pow(distance2(x, y), 0.5 * (2 * k - n)) * kernel_integral(std::sqrt(1.0 + p), k, n)};
}

double check_conformal_relation(std::span<const double> x, std::span<const double> y, int k) {
  const int n = static_cast<int>(x.size());
  const double gb = green_ball(x, y, k).value;
  auto shift = [](std::span<const double> z) {
    Point w(z.begin(), z.end());
    w[0] += 1.0;
    return norm(w);
  };
  const double gh = green_half(phi(x), phi(y), k).value;
  const double rhs = std::pow(shift(x) * shift(y), 2 * k - n) * gh;
  return std::abs(gb - rhs) / gb;
}

}  // namespace polycrit
