#pragma once

#include <span>
#include <vector>

#include "polycrit/geometry.hpp"
#include "polycrit/jet.hpp"

namespace polycrit {

// Phi(y) = (y + e_1)/|y + e_1|^2 - e_1/2 maps the unit ball onto the half-space x_1 > 0.
Point phi(std::span<const double> y);
std::vector<Taylor> phi(std::span<const Taylor> y);
Point phi_inv(std::span<const double> x);
// D Phi(y), row-major.
std::vector<double> phi_jacobian(std::span<const double> y);

// u*(y) = |y + e_1|^{2k-n} u(Phi(y)).
double cayley_transform(const JetProvider& u, int k, std::span<const double> y);
Jet cayley_jet(const JetProvider& u, int k, std::span<const double> y, int order);

// | |Phi(x) - Phi(y)| |x + e_1| |y + e_1| - |x - y| |
double check_distance_identity(std::span<const double> x, std::span<const double> y);

struct IntegralPair {
  double lhs = 0.0;  // over the ball
  double rhs = 0.0;  // over the half-space
  double rel_error = 0.0;
  double error_estimate = 0.0;
};

struct NormInvarianceReport {
  IntegralPair critical;  // |u|^{2#}
  IntegralPair energy;    // |(-Delta)^{k/2} u|^2
};

struct NormInvarianceOptions {
  double radius = 8.0;  // u is negligible outside B(0, radius)
  double tol = 1e-7;
  std::uint64_t seed = 0;
};

// Axisymmetric providers (about the e_1 axis) use deterministic axial rules, others QMC.
NormInvarianceReport check_norm_invariance(const JetProvider& u, int k, const NormInvarianceOptions& opts = {});

struct ConjugationReport {
  double lhs_exact;       // (-Delta)^k v*(y) from the composed series
  double lhs_fd;          // Richardson-extrapolated finite differences
  double rhs;             // |y + e_1|^{-n-2k} (-Delta)^k v(Phi(y))
  double exact_residual;
  double fd_residual;
  double fd_error;        // estimated truncation error of lhs_fd
  double fd_residual_h;   // plain finite differences at step h
  double h;
  bool ill_conditioned;   // y close to -e_1
};

// h <= 0 selects 1e-3 (1 + |y + e_1|).
ConjugationReport check_laplacian_conjugation(const JetProvider& v, int k, std::span<const double> y,
                                              double h = 0.0);

}  // namespace polycrit
