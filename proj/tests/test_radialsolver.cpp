#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "polycrit/errors.hpp"
#include "polycrit/radialgebra.hpp"
#include "polycrit/radialsolver.hpp"

using namespace polycrit;

namespace {

// Classical RK4 on (v_i, v_i'), with steps 0.01 r near the origin and 1e-4 further out.
std::vector<double> rk4_oracle(const ProblemParams& pp, std::vector<double> d, double r_end) {
  const int k = pp.k, n = pp.n;
  const double q = 2.0 * n / (n - 2.0 * k) - 2.0;
  auto g = [&](double u, double vp) { return (pp.nonlinear ? std::pow(std::abs(u), q) * u : 0.0) - pp.mu * vp; };
  auto rhs = [&](double r, const std::vector<double>& y) {
    std::vector<double> dy(2 * k);
    for (int i = 0; i < k; ++i) {
      dy[2 * i] = y[2 * i + 1];
      const double next = i + 1 < k ? y[2 * i + 2] : g(y[0], y[2 * pp.p]);
      dy[2 * i + 1] = -(n - 1.0) / r * y[2 * i + 1] - next;
    }
    return dy;
  };
  // v_i = d_i - d_{i+1} r^2 / (2n) near 0
  const double r0 = 1e-6;
  std::vector<double> y(2 * k);
  for (int i = 0; i < k; ++i) {
    const double next = i + 1 < k ? d[i + 1] : g(d[0], d[pp.p]);
    y[2 * i] = d[i] - next * r0 * r0 / (2.0 * n);
    y[2 * i + 1] = -next * r0 / n;
  }
  double r = r0;
  auto axpy = [](const std::vector<double>& a, double h, const std::vector<double>& b) {
    std::vector<double> c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += h * b[i];
    return c;
  };
  while (r < r_end) {
    const double h = std::min({0.01 * r, 1e-4, r_end - r});
    const auto k1 = rhs(r, y);
    const auto k2 = rhs(r + h / 2, axpy(y, h / 2, k1));
    const auto k3 = rhs(r + h / 2, axpy(y, h / 2, k2));
    const auto k4 = rhs(r + h, axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    r += h;
  }
  return y;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double bubble(int n, int k, double mu, double r) {
  return std::pow(mu / (mu * mu + bubble_constant(n, k) * r * r), 0.5 * (n - 2.0 * k));
}

RadialSolution synthetic(int n, int k, double mu, const std::function<double(double)>& extra) {
  RadialSolution s;
  s.params = {n, k, 0, 0.0};
  s.r = default_grid(1e-6);
  s.v.assign(k, std::vector<double>(s.r.size()));
  s.dv = s.v;
  for (std::size_t j = 0; j < s.r.size(); ++j) s.v[0][j] = bubble(n, k, mu, s.r[j]) + extra(s.r[j]);
  s.d.assign(k, 0.0);
  s.d[0] = bubble(n, k, mu, 0.0) + extra(0.0);
  return s;
}

}  // namespace

TEST_CASE("shooting from zero and from constants") {
  const ProblemParams pp{5, 2, 0, 0.3};
  const auto zero = shoot(pp, std::vector<double>{0.0, 0.0});
  CHECK(zero.mismatch_norm == 0.0);
  CHECK(zero.sup_norm == 0.0);

  ProblemParams lin{5, 2, 0, 0.0, false};
  const auto one = shoot(lin, std::vector<double>{1.0, 0.0});
  CHECK(one.mismatch[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(one.mismatch[1]) < 1e-14);
  for (double v : one.v[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  // biharmonic and triharmonic polynomials: a - b r^2/(2n) + c r^4/(8n(n+2))
  const int n = 9;
  ProblemParams tri{n, 3, 0, 0.0, false};
  const double a = 0.7, b = -1.3, c = 2.1;
  const auto s = shoot(tri, std::vector<double>{a, b, c});
  const double c2 = -b / (2.0 * n), c4 = c / (8.0 * n * (n + 2));
  CHECK(rel(s.mismatch[0], a + c2 + c4) < 1e-10);
  CHECK(rel(s.mismatch[1], 2 * c2 + 4 * c4) < 1e-10);
  CHECK(rel(s.mismatch[2], 2 * c2 + 12 * c4) < 1e-10);

  CHECK_THROWS_AS(shoot(pp, std::vector<double>{1.0}), ParameterError);
  CHECK_THROWS_AS(shoot(ProblemParams{4, 2, 0, 0.0}, std::vector<double>{1.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(shoot(ProblemParams{9, 2, 2, 0.0}, std::vector<double>{1.0, 0.0}), ParameterError);
}

TEST_CASE("shooting against independent integrators") {
  // -Delta u = lambda u: u = d Gamma(n/2) (sqrt(lambda) r / 2)^{1-n/2} J_{n/2-1}(sqrt(lambda) r)
  for (int n : {3, 6}) {
    const double lambda = 4.0;
    ProblemParams pp{n, 1, 0, -lambda, false};
    const auto s = shoot(pp, std::vector<double>{2.0});
    const double z = std::sqrt(lambda);
    const double nu = n / 2.0 - 1.0;
    const double exact = 2.0 * boost::math::tgamma(n / 2.0) * std::pow(z / 2, -nu) * boost::math::cyl_bessel_j(nu, z);
    CHECK(rel(s.mismatch[0], exact) < 1e-8);
  }

  const ProblemParams pp{3, 1, 0, 0.0};
  const auto s = shoot(pp, std::vector<double>{1.0});
  const auto y = rk4_oracle(pp, {1.0}, 1.0);
  CHECK(rel(s.mismatch[0], y[0]) < 1e-9);
  CHECK(rel(s.v[0].back(), y[0]) < 1e-9);
  CHECK(rel(s.dv[0].back(), y[1]) < 1e-9);

  const ProblemParams pp2{9, 2, 1, -0.5};
  const auto s2 = shoot(pp2, std::vector<double>{3.0, 2.0});
  const auto y2 = rk4_oracle(pp2, {3.0, 2.0}, 1.0);
  CHECK(rel(s2.mismatch[0], y2[0]) < 1e-9);
  CHECK(rel(s2.mismatch[1], y2[1]) < 1e-9);

  // regular at the origin: v_i' extrapolated to r = 0
  for (int i = 0; i < 2; ++i) {
    const auto& r = s2.r;
    const auto& dv = s2.dv[i];
    CHECK(std::abs(dv[0] - r[0] * (dv[1] - dv[0]) / (r[1] - r[0])) < 1e-10);
  }

  // fourth-order growth like u^{2#-1} from a strongly convex start blows up inside the ball
  try {
    shoot(ProblemParams{9, 2, 0, 0.0}, std::vector<double>{1.0, -1e5});
    FAIL("expected blow-up");
  } catch (const IntegrationFailure& e) {
    CHECK(e.blowup_radius() > 0.0);
    CHECK(e.blowup_radius() < 1.0);
  }
}

TEST_CASE("Newton on the shooting map") {
  const ProblemParams triv{7, 1, 0, -1.0};
  const auto z = newton_solve(triv, std::vector<double>{0.0});
  CHECK(z.sup_norm == 0.0);

  const auto seed = scan_seed(triv, 10.0, 1e6);
  const auto s = newton_solve(triv, seed);
  CHECK(s.d[0] > 100.0);
  CHECK(s.mismatch_norm <= 1e-10 * s.d[0]);
  for (double v : s.v[0]) CHECK(v > 0.0);

  // strong residual -u'' - (n-1)/r u' - (u^{2#-1} + lambda u) at fresh radii, u'' by differences of u'
  const int n = 7;
  for (double r : {1e-3, 0.01, 0.05, 0.3, 0.7, 0.95}) {
    const double h = 0.002 * r;
    const std::vector<double> grid{r - 2 * h, r - h, r, r + h, r + 2 * h};
    const auto g = shoot(triv, s.d, {}, grid);
    const auto& du = g.dv[0];
    const double u = g.v[0][2];
    const double upp = (-du[4] + 8 * du[3] - 8 * du[1] + du[0]) / (12 * h);
    const double source = std::pow(u, (n + 2.0) / (n - 2.0)) + 1.0 * u;
    const double res = -upp - (n - 1.0) / r * du[2] - source;
    CHECK(std::abs(res) < 1e-7 * std::max({std::abs(upp), std::abs(source), std::abs((n - 1.0) / r * du[2])}));
  }

  const auto again = newton_solve(triv, s.d);
  CHECK(rel(again.d[0], s.d[0]) < 1e-10);

  NewtonOptions one;
  one.max_iterations = 1;
  CHECK_THROWS_AS(newton_solve(triv, std::vector<double>{1e3}, one), ConvergenceError);
  CHECK_THROWS_AS(scan_seed(ProblemParams{9, 2, 0, 0.0}, 1.0, 10.0), UnsupportedError);
}

TEST_CASE("bubble fits") {
  const int n = 7, k = 1;
  const double mu = 0.05;
  const auto exact = fit_bubble(synthetic(n, k, mu, [](double) { return 0.0; }));
  CHECK(exact.mu_fit == doctest::Approx(mu).epsilon(1e-12));
  CHECK(exact.residual < 1e-10);

  const double u0 = std::pow(mu, -2.5);
  const auto pert = fit_bubble(synthetic(n, k, mu, [&](double r) { return 1e-3 * u0 * std::cos(3.0 * r); }));
  CHECK(pert.residual > 3e-4);
  CHECK(pert.residual < 3e-3);

  CHECK_THROWS_AS(fit_bubble(synthetic(n, k, mu, [&](double r) { return 2.0 * u0 * std::exp(-100 * (r - 0.5) * (r - 0.5)); })),
                  UnsupportedError);
}

TEST_CASE("blow-up along the Brezis-Nirenberg branch") {
  const ProblemParams pp{7, 1, 0, -0.5};
  const auto start = newton_solve(pp, scan_seed(pp, 10.0, 1e6));
  const std::vector<double> grid{-0.5, -0.25, -0.1, -0.05, -0.02};
  const auto br = continuation(pp, grid, start);
  REQUIRE_FALSE(br.lost);
  REQUIRE(br.points.size() == grid.size());
  for (std::size_t i = 1; i < br.points.size(); ++i) {
    CHECK(br.points[i].sup_norm > br.points[i - 1].sup_norm);
    CHECK(br.points[i].mu_fit < br.points[i - 1].mu_fit);
  }
  CHECK(br.points.back().fit_residual < 5e-2);

  // energies approach that of one bubble on R^n
  RadialFunction g = radial_derivative(make_bubble(7, 1));
  const double bubble_energy = (g * g).integrate(bubble_constant(7, 1));
  CHECK(rel(br.points.back().energy, bubble_energy) < 1e-2);

  const auto fit = pohozaev_scaling(br);
  CHECK(std::abs(fit.slope - 2.0) < 0.2);
}

TEST_CASE("scaling of exact bubble branches") {
  const std::vector<double> mus{1e-2, 5e-3, 2e-3, 1e-3, 5e-4};
  for (auto [n, k, p] : {std::tuple{7, 1, 0}, {11, 2, 0}, {9, 2, 1}}) {
    const auto br = synthetic_bubble_branch(n, k, p, mus);
    const auto fit = pohozaev_scaling(br);
    CHECK(std::abs(fit.slope - 2.0 * (k - p)) < 0.05);

    // direct quadrature of g^2 over |y| < 1/mu on dyadic panels
    RadialFunction g = make_bubble(n, k);
    for (int i = 0; i < p / 2; ++i) g = minus_laplacian(g);
    if (p % 2) g = radial_derivative(g);
    const double a = bubble_constant(n, k);
    auto dens = [&](double r) { return std::pow(g.eval(r, a), 2) * std::pow(r, n - 1); };
    const double R = 1.0 / mus.back();
    double direct = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dens, 0.0, 1.0, 15, 1e-13);
    for (double lo = 1.0; lo < R; lo *= 2)
      direct += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dens, lo, std::min(2 * lo, R), 15, 1e-13);
    direct *= 2 * std::pow(M_PI, n / 2.0) / boost::math::tgamma(n / 2.0);
    CHECK(rel(br.points.back().poho_term / std::pow(mus.back(), 2.0 * (k - p)), direct) < 1e-9);
  }

  const auto short_branch = synthetic_bubble_branch(7, 1, 0, std::vector<double>{1e-2, 1e-3, 1e-4});
  CHECK_THROWS_AS(pohozaev_scaling(short_branch), ParameterError);
  const auto flat = synthetic_bubble_branch(7, 1, 0, std::vector<double>(5, 1e-2));
  CHECK(pohozaev_scaling(flat).degenerate);
}

TEST_CASE("branch CSV and manifest") {
  const auto br = synthetic_bubble_branch(7, 1, 0, std::vector<double>{1e-2, 1e-3});
  const auto csv = branch_csv(br);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "mu_param,sup_norm,energy,mu_fit,fit_residual,poho_term");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  const auto j = nlohmann::json::parse(run_manifest(br, {}));
  CHECK(j["problem"]["n"] == 7);
  CHECK(j["shooting"]["eps"].get<double>() == 1e-6);
  CHECK(j["newton"]["max_iterations"] == 50);
  CHECK(j["points"] == 2);
}
