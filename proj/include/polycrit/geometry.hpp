#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace polycrit {

using Point = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Point subtract(std::span<const double> a, std::span<const double> b) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Point unit_vector(int n, int i) {
  Point e(n, 0.0);
  e[i] = 1.0;
  return e;
}

// Area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

inline double ball_volume(int n, double r) { return sphere_area(n) * std::pow(r, n) / n; }

}  // namespace polycrit
