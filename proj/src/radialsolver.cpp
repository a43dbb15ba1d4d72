#include "polycrit/radialsolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "polycrit/errors.hpp"
#include "polycrit/geometry.hpp"
#include "polycrit/radialgebra.hpp"

namespace polycrit {

namespace {

using State = std::vector<double>;
namespace odeint = boost::numeric::odeint;

double f_nl(const ProblemParams& pp, double u) {
  if (!pp.nonlinear) return 0.0;
  return std::pow(std::abs(u), pp.critical_exponent() - 2.0) * u;
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Densities of int |(-Delta)^{l/2} u|^2 from the state.
double power_density(const State& y, int l) {
  if (l % 2 == 0) return y[2 * (l / 2)] * y[2 * (l / 2)];
  const double g = y[2 * ((l - 1) / 2) + 1];
  return g * g;
}

struct System {
  ProblemParams pp;
  double omega;

  // y = (v_0, v_0', ..., v_{k-1}, v_{k-1}', energy, poho)
  void operator()(const State& y, State& dy, double r) const {
    const int k = pp.k;
    for (int i = 0; i < k; ++i) {
      const double rhs = i + 1 < k ? y[2 * i + 2] : f_nl(pp, y[0]) - pp.mu * y[2 * pp.p];
      dy[2 * i] = y[2 * i + 1];
      dy[2 * i + 1] = -(pp.n - 1.0) / r * y[2 * i + 1] - rhs;
    }
    const double w = omega * std::pow(r, pp.n - 1);
    dy[2 * k] = w * power_density(y, k);
    dy[2 * k + 1] = w * power_density(y, pp.p);
  }
};

// Series v_i = sum_{j<=2} a_{ij} r^{2j} at the origin.
State start_state(const ProblemParams& pp, std::span<const double> d, double eps) {
  const int k = pp.k, n = pp.n;
  std::vector<std::array<double, 3>> a(k + 1);
  for (int i = 0; i < k; ++i) a[i][0] = d[i];
  a[k][0] = f_nl(pp, d[0]) - pp.mu * d[pp.p];
  for (int i = 0; i < k; ++i) a[i][1] = -a[i + 1][0] / (2.0 * n);
  const double fprime = pp.nonlinear ? (pp.critical_exponent() - 1.0) * std::pow(std::abs(d[0]), pp.critical_exponent() - 2.0) : 0.0;
  a[k][1] = fprime * a[0][1] - pp.mu * a[pp.p][1];
  for (int i = 0; i < k; ++i) a[i][2] = -a[i + 1][1] / (4.0 * (n + 2));
  State y(2 * k + 2, 0.0);
  for (int i = 0; i < k; ++i) {
    y[2 * i] = a[i][0] + a[i][1] * eps * eps + a[i][2] * std::pow(eps, 4);
    y[2 * i + 1] = 2.0 * a[i][1] * eps + 4.0 * a[i][2] * std::pow(eps, 3);
  }
  return y;
}

// u^{(j)}(1), j < k, from v_i(1), v_i'(1) and the equations.
std::vector<double> boundary_derivatives(const ProblemParams& pp, const State& y) {
  const int k = pp.k, n = pp.n;
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (int i = 0; i < k; ++i) {
    a[i][0] = y[2 * i];
    a[i][1] = y[2 * i + 1];
  }
  // the last equation only reaches coefficients of order >= 2k, so the nonlinearity never enters
  for (int m = 0; m + 2 <= k - 1; ++m)
    for (int i = 0; i + 1 < k; ++i) {
      double drift = 0.0;  // coefficient of t^m in (n-1) v_i' / r, t = r - 1
      for (int j = 0; j <= m; ++j) drift += ((m - j) % 2 ? -1.0 : 1.0) * (j + 1) * a[i][j + 1];
      a[i][m + 2] = -((n - 1.0) * drift + a[i + 1][m]) / ((m + 2.0) * (m + 1.0));
    }
  std::vector<double> out(k);
  double fact = 1.0;
  for (int j = 0; j < k; ++j) {
    out[j] = fact * a[0][j];
    fact *= j + 1;
  }
  return out;
}

double bubble_value(int n, int k, double mu, double r) {
  return std::pow(mu / (mu * mu + bubble_constant(n, k) * r * r), 0.5 * (n - 2.0 * k));
}

// int_{|x| < 1} |(-Delta)^{l/2} B_mu|^2 for the standard bubble of scale mu.
double bubble_power_integral(int n, int k, int l, double mu) {
  RadialFunction g = make_bubble(n, k);
  for (int i = 0; i < l / 2; ++i) g = minus_laplacian(g);
  if (l % 2) g = radial_derivative(g);
  const RadialFunction g2 = g * g;
  const double a = bubble_constant(n, k);
  // the integral is mu^{2k-2l} times that of g^2 over |y| < 1/mu: the closed form on R^n minus the tail
  boost::math::quadrature::exp_sinh<double> tail_rule;
  const double tail =
      sphere_area(n) * tail_rule.integrate(
                           [&](double r) {
                             const double v = g2.eval(r, a) * std::pow(r, n - 1);
                             return std::isfinite(v) ? v : 0.0;  // far out, where the factors overflow
                           },
                           1.0 / mu, std::numeric_limits<double>::infinity());
  return std::pow(mu, 2.0 * (k - l)) * (g2.integrate(a) - tail);
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

void ProblemParams::validate() const {
  if (k < 1 || n <= 2 * k) throw ParameterError("radial problem needs k >= 1 and n > 2k");
  if (p < 0 || p > k - 1) throw ParameterError("lower-order index p must lie in [0, k-1]");
  if (!std::isfinite(mu)) throw ParameterError("coefficient mu must be finite");
}

double ProblemParams::critical_exponent() const { return 2.0 * n / (n - 2.0 * k); }

std::vector<double> default_grid(double eps) {
  std::vector<double> g;
  const double split = 1e-2;
  for (int i = 0; i < 200; ++i) g.push_back(eps * std::pow(split / eps, i / 200.0));
  for (int i = 0; i <= 1000; ++i) g.push_back(split + (1.0 - split) * i / 1000.0);
  return g;
}

RadialSolution shoot(const ProblemParams& params, std::span<const double> d, const SolverOptions& opts,
                     std::span<const double> grid_in) {
  params.validate();
  const int k = params.k;
  if (static_cast<int>(d.size()) != k) throw ParameterError("shooting data must have k entries");
  for (double x : d)
    if (!std::isfinite(x)) throw ParameterError("shooting data must be finite");
  if (!(opts.rtol > 0.0)) throw ParameterError("rtol must be positive");

  std::vector<double> grid(grid_in.begin(), grid_in.end());
  if (grid.empty()) grid = default_grid(opts.eps);
  if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < opts.eps || grid.back() > 1.0)
    throw ParameterError("grid must be sorted within [eps, 1]");
  if (grid.back() < 1.0) grid.push_back(1.0);

  RadialSolution sol;
  sol.params = params;
  sol.d.assign(d.begin(), d.end());
  sol.r = grid;
  sol.v.assign(k, std::vector<double>(grid.size()));
  sol.dv.assign(k, std::vector<double>(grid.size()));

  const System sys{params, sphere_area(params.n)};
  State y = start_state(params, d, opts.eps);
  const double scale = std::max(1.0, sup_abs(d));
  auto stepper = odeint::make_dense_output(opts.rtol * 1e-2 * scale, opts.rtol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(y, opts.eps, opts.first_step);

  State at(y.size());
  auto record = [&](std::size_t j, const State& s) {
    for (int i = 0; i < k; ++i) {
      sol.v[i][j] = s[2 * i];
      sol.dv[i][j] = s[2 * i + 1];
    }
  };
  std::size_t gi = 0;
  while (gi < grid.size() && grid[gi] <= opts.eps) record(gi++, y);
  long steps = 0;
  while (gi < grid.size()) {
    if (stepper.current_time() >= grid[gi]) {
      stepper.calc_state(grid[gi], at);
      record(gi++, at);
      if (gi == grid.size()) y = at;
      continue;
    }
    const double before = stepper.current_time();
    stepper.do_step(sys);
    const State& s = stepper.current_state();
    bool bad = !std::isfinite(stepper.current_time());
    for (int i = 0; i < 2 * k && !bad; ++i) bad = !std::isfinite(s[i]) || std::abs(s[i]) > opts.blowup * scale;
    if (bad) throw IntegrationFailure("radial solution blew up", before);
    if (++steps > opts.max_steps) throw IntegrationFailure("too many integration steps", before);
  }

  sol.mismatch = boundary_derivatives(params, y);
  sol.mismatch_norm = sup_abs(sol.mismatch);
  sol.sup_norm = std::max(std::abs(d[0]), sup_abs(sol.v[0]));
  sol.energy = y[2 * k];
  sol.poho_term = y[2 * k + 1];
  return sol;
}

RadialSolution newton_solve(const ProblemParams& params, std::span<const double> d_init, const NewtonOptions& opts) {
  const int k = params.k;
  std::vector<double> d(d_init.begin(), d_init.end());
  RadialSolution sol = shoot(params, d, opts.shooting);
  auto converged = [&](const RadialSolution& s) {
    return s.mismatch_norm <= opts.shooting.rtol * std::max(1.0, sup_abs(s.d));
  };
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (converged(sol)) return sol;
    Eigen::MatrixXd J(k, k);
    for (int j = 0; j < k; ++j) {
      std::vector<double> dp = d;
      const double h = opts.fd_step * std::max(1.0, std::abs(d[j]));
      dp[j] += h;
      const auto sp = shoot(params, dp, opts.shooting);
      for (int i = 0; i < k; ++i) J(i, j) = (sp.mismatch[i] - sol.mismatch[i]) / h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cond = sv(k - 1) > 0.0 ? sv(0) / sv(k - 1) : std::numeric_limits<double>::infinity();
    if (!(cond < 1e14)) throw ConvergenceError("singular shooting Jacobian", cond);
    const Eigen::VectorXd F = Eigen::Map<const Eigen::VectorXd>(sol.mismatch.data(), k);
    const Eigen::VectorXd delta = svd.solve(-F);

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings && !accepted; ++h, lambda *= 0.5) {
      std::vector<double> trial = d;
      for (int i = 0; i < k; ++i) trial[i] += lambda * delta(i);
      try {
        auto st = shoot(params, trial, opts.shooting);
        if (st.mismatch_norm < sol.mismatch_norm || converged(st)) {
          d = trial;
          sol = std::move(st);
          accepted = true;
        }
      } catch (const IntegrationFailure&) {
      }
    }
    if (!accepted) throw ConvergenceError("Newton line search failed", cond);
  }
  if (converged(sol)) return sol;
  throw ConvergenceError("Newton did not converge in the iteration limit");
}

std::vector<double> scan_seed(const ProblemParams& params, double lo, double hi, int samples,
                              const SolverOptions& opts) {
  params.validate();
  if (params.k != 1) throw UnsupportedError("seed scan is only available for k = 1");
  if (!(lo > 0.0) || !(hi > lo) || samples < 2) throw ParameterError("seed scan needs 0 < lo < hi and two samples");
  double prev = lo, prev_u = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double d0 = lo * std::pow(hi / lo, i / (samples - 1.0));
    double u1;
    try {
      u1 = shoot(params, std::vector<double>{d0}, opts).mismatch[0];
    } catch (const IntegrationFailure&) {
      continue;
    }
    if (i > 0 && prev_u > 0.0 && u1 <= 0.0) {
      double a = prev, b = d0;
      for (int it = 0; it < 20; ++it) {
        const double m = std::sqrt(a * b);
        (shoot(params, std::vector<double>{m}, opts).mismatch[0] > 0.0 ? a : b) = m;
      }
      return {std::sqrt(a * b)};
    }
    prev = d0;
    prev_u = u1;
  }
  throw ConvergenceError("no sign change of u(1) in the scanned range");
}

BubbleFit fit_bubble(const RadialSolution& s) {
  const int n = s.params.n, k = s.params.k;
  if (s.d.empty() || !(s.d[0] > 0.0)) throw UnsupportedError("bubble fit needs a positive value at the origin");
  const double u0 = s.d[0];
  if (sup_abs(s.v[0]) > u0 * (1.0 + 1e-9)) throw UnsupportedError("maximum is not attained at the origin");
  const double mu = std::pow(u0, -2.0 / (n - 2.0 * k));
  const double rmax = std::min(10.0 * mu, 1.0);
  double res = 0.0;
  for (std::size_t j = 0; j < s.r.size(); ++j)
    if (s.r[j] <= rmax) res = std::max(res, std::abs(s.v[0][j] - bubble_value(n, k, mu, s.r[j])));
  return {mu, res / u0};
}

Branch continuation(const ProblemParams& params, std::span<const double> mu_grid, const RadialSolution& seed,
                    const ContinuationOptions& opts) {
  params.validate();
  Branch br;
  br.params = params;
  double mu_c = seed.params.mu;
  std::vector<double> d_c = seed.d, d_prev;
  double mu_prev = mu_c;
  for (double target : mu_grid) {
    int halvings = 0;
    double h = target - mu_c;
    while (true) {
      const double mu_t = mu_c + h;
      std::vector<double> pred = d_c;
      if (!d_prev.empty() && mu_c != mu_prev)
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += h * (d_c[i] - d_prev[i]) / (mu_c - mu_prev);
      ProblemParams pp = params;
      pp.mu = mu_t;
      std::optional<RadialSolution> sol;
      try {
        sol = newton_solve(pp, pred, opts.newton);
        if (sol->sup_norm < opts.trivial) sol.reset();
      } catch (const ConvergenceError&) {
      } catch (const IntegrationFailure&) {
      }
      if (!sol) {
        if (++halvings > opts.max_halvings) {
          br.lost = true;
          br.message = "branch lost near mu = " + fmt(mu_c + h);
          return br;
        }
        h *= 0.5;
        continue;
      }
      d_prev = d_c;
      mu_prev = mu_c;
      d_c = sol->d;
      mu_c = mu_t;
      if (mu_t == target) {
        BranchPoint bp{target, sol->sup_norm, sol->energy, std::nan(""), std::nan(""), sol->poho_term, sol->d};
        try {
          const auto fit = fit_bubble(*sol);
          bp.mu_fit = fit.mu_fit;
          bp.fit_residual = fit.residual;
        } catch (const UnsupportedError&) {
        }
        br.points.push_back(std::move(bp));
        break;
      }
      h = target - mu_c;
    }
  }
  return br;
}

Branch synthetic_bubble_branch(int n, int k, int p, std::span<const double> mus) {
  ProblemParams pp{n, k, p, 0.0};
  pp.validate();
  Branch br;
  br.params = pp;
  for (double mu : mus) {
    if (!(mu > 0.0)) throw ParameterError("bubble scales must be positive");
    br.points.push_back({0.0, std::pow(mu, -0.5 * (n - 2.0 * k)), bubble_power_integral(n, k, k, mu), mu, 0.0,
                         bubble_power_integral(n, k, p, mu), {}});
  }
  return br;
}

ScalingFit pohozaev_scaling(const Branch& branch) {
  if (branch.points.size() < 4) throw ParameterError("scaling fit needs at least 4 branch points");
  std::vector<double> x, y;
  for (const auto& bp : branch.points) {
    if (!(bp.mu_fit > 0.0) || !(bp.poho_term > 0.0)) throw ParameterError("scaling fit needs positive mu_fit and term");
    x.push_back(std::log(bp.mu_fit));
    y.push_back(std::log(bp.poho_term));
  }
  const double m = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx < 1e-24 * m) return {std::nan(""), std::nan(""), std::nan(""), true};
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - icpt - slope * x[i], 2);
  return {slope, icpt, std::sqrt(ss / m), false};
}

std::string branch_csv(const Branch& branch) {
  std::ostringstream s;
  s << "mu_param,sup_norm,energy,mu_fit,fit_residual,poho_term\n";
  for (const auto& bp : branch.points)
    s << fmt(bp.mu_param) << ',' << fmt(bp.sup_norm) << ',' << fmt(bp.energy) << ',' << fmt(bp.mu_fit) << ','
      << fmt(bp.fit_residual) << ',' << fmt(bp.poho_term) << '\n';
  return s.str();
}

std::string run_manifest(const Branch& branch, const ContinuationOptions& opts) {
  const auto& pp = branch.params;
  const auto& sh = opts.newton.shooting;
  nlohmann::json j = {
      {"problem", {{"n", pp.n}, {"k", pp.k}, {"p", pp.p}, {"nonlinear", pp.nonlinear},
                   {"equation", "(-Delta)^k u + mu (-Delta)^p u = |u|^{2#-2} u, mu = -lambda"}}},
      {"shooting",
       {{"eps", sh.eps}, {"rtol", sh.rtol}, {"first_step", sh.first_step}, {"max_steps", sh.max_steps},
        {"blowup", sh.blowup}, {"integrator", "dopri5 dense output"}}},
      {"newton",
       {{"max_iterations", opts.newton.max_iterations}, {"max_halvings", opts.newton.max_halvings},
        {"fd_step", opts.newton.fd_step}}},
      {"continuation", {{"max_halvings", opts.max_halvings}, {"trivial", opts.trivial}}},
      {"points", branch.points.size()},
      {"lost", branch.lost},
      {"message", branch.message}};
  return j.dump(2);
}

}  // namespace polycrit
