#pragma once

#include <span>

namespace polycrit {

// (1 - |x|^2)(1 - |y|^2)/|x - y|^2 on the closed unit ball.
double psi_ball(std::span<const double> x, std::span<const double> y);
// 4 x_1 y_1/|x - y|^2 on the closed half-space x_1 >= 0.
double psi_half(std::span<const double> x, std::span<const double> y);

// int_1^s (t^2 - 1)^{k-1} t^{1-n} dt for s >= 1 (s may be +inf).
double kernel_integral(double s, int k, int n);

struct GreenEval {
  int n = 0;
  int k = 0;
  double kappa = 1.0;  // normalization constant
  double value = 0.0;
};

// kappa |x - y|^{2k-n} kernel_integral(sqrt(1 + psi)), kappa = 1.
GreenEval green_ball(std::span<const double> x, std::span<const double> y, int k);
GreenEval green_half(std::span<const double> x, std::span<const double> y, int k);

// |G_B(x,y) - |x+e_1|^{2k-n} |y+e_1|^{2k-n} G_half(Phi(x), Phi(y))| / G_B(x,y)
double check_conformal_relation(std::span<const double> x, std::span<const double> y, int k);

}  // namespace polycrit
