#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polycrit/jet.hpp"
#include "polycrit/quad.hpp"

namespace polycrit {

// (-Delta)^k u - f |u|^{p-2} u at the jet's point.
double e_operator(const Jet& jet, int k, double f, double p);

struct ValueGrad {
  double value;
  Point gradient;
};

// (-Delta)^i ((x - xi) . grad u) and its gradient, from
// (-Delta)^i (X . grad u) = X . grad (-Delta)^i u + 2i (-Delta)^i u. Needs a jet of order 2i + 2.
ValueGrad x_grad_laplacian(const Jet& jet, std::span<const double> x, int i, std::span<const double> xi);

struct PohozaevOptions {
  double tol = 1e-11;  // relative, deterministic rules
  QuadOptions fallback{.tol = 1e-4, .seed = 0, .replicates = 8, .points = 1 << 15, .throw_on_inaccuracy = false};
  bool dirichlet = false;  // u has Dirichlet data on the outer boundary
};

struct LhsResult {
  QuadratureResult full;
  // (-1)^k/2 times the boundary integral of (x - xi, nu) |(-Delta)^{k/2} u|^2, for Dirichlet u.
  std::optional<QuadratureResult> simplified;
  // The same integral with -1/2 in front, which is what the full expression reduces to.
  std::optional<QuadratureResult> reduced;
};

// The boundary expression P_k on a Ball, HalfBall or BallMinusBalls domain.
LhsResult pohozaev_lhs(const JetProvider& u, const Domain& domain, std::span<const double> xi, int k,
                       const PohozaevOptions& opts = {});

struct RhsTerms {
  QuadratureResult T1;  // int ((n-2k)/2 u + X . grad u) E(u)
  QuadratureResult T2;  // (1/p) boundary int (X, nu) f |u|^p
  QuadratureResult T3;  // ((n-2k)/2 - n/p) int f |u|^p
  QuadratureResult T4;  // -(1/p) int X . grad f |u|^p
};

// f == nullptr means f = 1.
RhsTerms pohozaev_rhs(const JetProvider& u, const JetProvider* f, double p, const Domain& domain,
                      std::span<const double> xi, int k, const PohozaevOptions& opts = {});

struct PohozaevReport {
  int n = 0;
  int k = 0;
  double p = 0.0;
  Domain domain{Ball{Point{0.0}, 1.0}};
  Point xi;
  LhsResult lhs;
  RhsTerms rhs;
  double residual_abs = 0.0;
  double residual_rel = 0.0;
  double budget = 0.0;      // sum of the quadrature error estimates plus a rounding floor
  double budget_rel = 0.0;  // relative to the same scale as residual_rel
  bool axial = false;       // deterministic axial rules were used

  bool within_budget() const { return residual_abs <= budget; }
};

PohozaevReport pohozaev_residual(const JetProvider& u, const JetProvider* f, double p, const Domain& domain,
                                 std::span<const double> xi, int k, const PohozaevOptions& opts = {});

std::string to_json(const PohozaevReport& report);

// Sum of coefficient * x^exponents.
struct Polynomial {
  std::vector<std::pair<std::vector<int>, double>> terms;

  static Polynomial constant(int n, double c);
  int degree() const;
  bool is_constant() const;
};

// (1 - |x|^2)^k poly, with Dirichlet data of order k on the unit sphere.
std::shared_ptr<JetProvider> manufactured_dirichlet(int k, int n, const Polynomial& poly);

}  // namespace polycrit
