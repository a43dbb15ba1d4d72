#pragma once

#include <span>
#include <string>
#include <vector>

namespace polycrit {

// (-Delta)^k u + mu (-Delta)^p u = |u|^{2#-2} u on the unit ball, u radial with Dirichlet data.
// The classical Brezis-Nirenberg problem -Delta u - lambda u = u^{2#-1} is k = 1, p = 0, mu = -lambda.
struct ProblemParams {
  int n = 3;
  int k = 1;
  int p = 0;
  double mu = 0.0;
  bool nonlinear = true;  // false drops |u|^{2#-2} u

  void validate() const;
  double critical_exponent() const;  // 2n / (n - 2k)
};

struct SolverOptions {
  double eps = 1e-6;  // start radius
  double rtol = 1e-10;
  double first_step = 1e-4;
  long max_steps = 2'000'000;
  double blowup = 1e20;  // relative to max(1, |d|)
};

// v_i = (-Delta)^i u, i < k, and their radial derivatives on a grid of [eps, 1].
struct RadialSolution {
  ProblemParams params;
  std::vector<double> r;
  std::vector<std::vector<double>> v;   // v[i][j] = v_i(r_j)
  std::vector<std::vector<double>> dv;  // dv[i][j] = v_i'(r_j)
  std::vector<double> d;                // v_i(0)
  std::vector<double> mismatch;         // u(1), u'(1), ..., u^{(k-1)}(1)
  double sup_norm = 0.0;
  double energy = 0.0;      // int |(-Delta)^{k/2} u|^2, which is int |nabla^k u|^2 for Dirichlet u
  double poho_term = 0.0;   // int |(-Delta)^{p/2} u|^2
  double mismatch_norm = 0.0;
};

// The default grid: 200 log-spaced radii in [eps, 1e-2] followed by 1000 uniform ones up to 1.
std::vector<double> default_grid(double eps);

// Integrates from eps, started from the series sum_{j<=2} c_j r^{2j} fixed by d, to r = 1.
// Derivatives of u at 1 come from the equations -v_i'' - (n-1)/r v_i' = v_{i+1}, i < k-1, expanded about r = 1.
// Throws IntegrationFailure with the radius reached if the solution blows up.
RadialSolution shoot(const ProblemParams& params, std::span<const double> d, const SolverOptions& opts = {},
                     std::span<const double> grid = {});

struct NewtonOptions {
  int max_iterations = 50;
  int max_halvings = 30;
  double fd_step = 1e-7;  // relative
  SolverOptions shooting;
};

// Damped Newton on the shooting map, Jacobian by finite differences. Converged when the mismatch
// is below shooting.rtol * max(1, |d|).
RadialSolution newton_solve(const ProblemParams& params, std::span<const double> d_init,
                            const NewtonOptions& opts = {});

// k = 1: log-spaced scan of u(0) in [lo, hi] for the first change of sign of u(1) from + to -,
// refined by bisection. Seeds the positive branch.
std::vector<double> scan_seed(const ProblemParams& params, double lo, double hi, int samples = 40,
                              const SolverOptions& opts = {});

struct BubbleFit {
  double mu_fit;
  double residual;  // sup over r <= min(10 mu_fit, 1) of |u - bubble| / u(0)
};

BubbleFit fit_bubble(const RadialSolution& solution);

struct BranchPoint {
  double mu_param;
  double sup_norm;
  double energy;
  double mu_fit;
  double fit_residual;
  double poho_term;
  std::vector<double> d;
};

struct Branch {
  ProblemParams params;
  std::vector<BranchPoint> points;
  bool lost = false;  // continuation stopped before the end of the grid
  std::string message;
};

struct ContinuationOptions {
  NewtonOptions newton;
  int max_halvings = 12;
  double trivial = 1e-6;  // sup norms below this count as the trivial branch
};

// Natural-parameter continuation from a solution at mu_grid[0]'s neighbourhood; one point per grid value.
Branch continuation(const ProblemParams& params, std::span<const double> mu_grid, const RadialSolution& seed,
                    const ContinuationOptions& opts = {});

// Exact bubbles of scales mus, with poho_term the integral over the unit ball.
Branch synthetic_bubble_branch(int n, int k, int p, std::span<const double> mus);

struct ScalingFit {
  double slope;
  double intercept;
  double rms;       // of the log residuals
  bool degenerate;  // mu_fit has no spread; slope is NaN
};

// Least-squares slope of log poho_term against log mu_fit. Needs at least 4 points.
ScalingFit pohozaev_scaling(const Branch& branch);

std::string branch_csv(const Branch& branch);
std::string run_manifest(const Branch& branch, const ContinuationOptions& opts);

}  // namespace polycrit
