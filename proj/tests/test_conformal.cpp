#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "polycrit/bubbles.hpp"
#include "polycrit/conformal.hpp"
#include "polycrit/errors.hpp"
#include "polycrit/greenfn.hpp"
#include "polycrit/radialgebra.hpp"

using namespace polycrit;

namespace {

Point random_in_ball(std::mt19937_64& rng, int n, double radius = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Point y(n);
    for (auto& v : y) v = u(rng);
    if (norm(y) < 1.0) {
      for (auto& v : y) v *= radius;
      return y;
    }
  }
}

// (1 - |x - c|^2 / r^2)^m inside B(c, r), with c on the e_1 axis.
std::shared_ptr<JetProvider> bump(int n, double c1, double r, int m, int x1_power = 0) {
  Point c(n, 0.0);
  c[0] = c1;
  Symmetry sym{x1_power ? Symmetry::Kind::axial : Symmetry::Kind::radial, c, unit_vector(n, 0)};
  return std::make_shared<TaylorJetProvider>(
      n, m - 1,
      [=](std::span<const Taylor> x) {
        Taylor s(x[0].set_ptr());
        for (int i = 0; i < n; ++i) {
          Taylor d = x[i] - c[i];
          s += d * d;
        }
        s *= 1.0 / (r * r);
        if (s.value() >= 1.0) return Taylor(x[0].set_ptr(), 0.0);
        Taylor b = pow(1.0 - s, m);
        return x1_power ? pow(x[0], x1_power) * b : b;
      },
      sym);
}

// x_1^k exp(-|x - c|^2), c on the e_1 axis.
std::shared_ptr<JetProvider> gaussian(int n, int k, double c1) {
  Point c(n, 0.0);
  c[0] = c1;
  return std::make_shared<TaylorJetProvider>(
      n, 64,
      [=](std::span<const Taylor> x) {
        Taylor s(x[0].set_ptr());
        for (int i = 0; i < n; ++i) {
          Taylor d = x[i] - c[i];
          s += d * d;
        }
        return pow(x[0], k) * exp(-s);
      },
      Symmetry{Symmetry::Kind::axial, c, unit_vector(n, 0)});
}

}  // namespace

TEST_CASE("Cayley map basics") {
  const Point half = phi(Point{0.0, 0.0, 0.0});
  CHECK(half == Point{0.5, 0.0, 0.0});
  const Point b = phi(Point{0.0, 1.0, 0.0});
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(0.5));
  CHECK(norm(phi_inv(Point{0.5, 0.0, 0.0})) < 1e-15);
  CHECK_THROWS_AS(phi(Point{-1.0, 0.0, 0.0}), SingularPointError);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Point y = random_in_ball(rng, 4);
    const Point x = phi(y);
    CHECK(x[0] > 0.0);
    const Point back = phi_inv(x);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(back[j] - y[j]) < 1e-12);
  }
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Point x{u(rng), u(rng) - 1.5, u(rng) - 1.5};
    Point y = phi_inv(x);
    Point xe = x;
    xe[0] += 0.5;
    Point ye = y;
    ye[0] += 1.0;
    CHECK(norm(ye) == doctest::Approx(1.0 / norm(xe)).epsilon(1e-12));
    CHECK(norm(y) <= 1.0 + 1e-15);
    const Point again = phi(y);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(again[j] - x[j]) < 1e-12);
    x[0] = 0.0;
    CHECK(norm(phi_inv(x)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("distance identity and psi invariance") {
  const Point z(3, 0.0);
  CHECK(check_distance_identity(z, z) == 0.0);
  CHECK(check_distance_identity(z, Point{0.0, 0.5, 0.0}) < 1e-12);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const int n = 3 + i % 4;
    const Point x = random_in_ball(rng, n), y = random_in_ball(rng, n);
    CHECK(check_distance_identity(x, y) < 1e-12);
    if (i % 10 == 0) CHECK(psi_half(phi(x), phi(y)) == doctest::Approx(psi_ball(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("Jacobian determinant") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 3;
    const Point y = random_in_ball(rng, n, 0.95);
    Eigen::MatrixXd fd(n, n);
    const double h = 1e-5;
    for (int j = 0; j < n; ++j) {
      Point a = y, b = y;
      a[j] += h;
      b[j] -= h;
      const Point pa = phi(a), pb = phi(b);
      for (int i = 0; i < n; ++i) fd(i, j) = (pa[i] - pb[i]) / (2 * h);
    }
    Point w = y;
    w[0] += 1.0;
    CHECK(std::abs(fd.determinant()) == doctest::Approx(std::pow(norm(w), -2.0 * n)).epsilon(1e-6));
    const auto D = phi_jacobian(y);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(D[i * n + j] == doctest::Approx(fd(i, j)).epsilon(1e-7));
  }
}

TEST_CASE("Cayley transform values") {
  auto one = std::make_shared<TaylorJetProvider>(3, 64, [](std::span<const Taylor> x) {
    return Taylor(x[0].set_ptr(), 2.5);
  });
  CHECK(cayley_transform(*one, 1, Point(3, 0.0)) == doctest::Approx(2.5));
  // standard bubble on the half-space at y = 0 gives B(e_1/2)
  const double a = bubble_constant(5, 2);
  auto B = std::make_shared<TaylorJetProvider>(5, 64, [a](std::span<const Taylor> x) {
    Taylor s(x[0].set_ptr());
    for (const auto& v : x) s += v * v;
    return pow(1.0 + a * s, -0.5);
  });
  CHECK(cayley_transform(*B, 2, Point(5, 0.0)) == doctest::Approx(standard_bubble(5, 2, 0.5)).epsilon(1e-15));
  const Point y{0.1, -0.3, 0.2, 0.0, 0.4};
  CHECK(cayley_jet(*B, 2, y, 3).value() == doctest::Approx(cayley_transform(*B, 2, y)).epsilon(1e-14));
}

TEST_CASE("critical and energy norms are preserved") {
  {
    auto zero = zero_provider(3);
    const auto r = check_norm_invariance(*zero, 1);
    CHECK(r.critical.lhs == 0.0);
    CHECK(r.critical.rhs == 0.0);
    CHECK(r.energy.lhs == 0.0);
  }
  for (auto [n, k] : {std::pair{3, 1}, std::pair{5, 2}}) {
    CAPTURE(n);
    NormInvarianceOptions o;
    o.radius = 3.0;
    auto b = bump(n, 1.5, 1.0, 8);
    auto r = check_norm_invariance(*b, k, o);
    CHECK(r.critical.rel_error < 1e-5);
    CHECK(r.energy.rel_error < 1e-5);
    CHECK(r.critical.rhs > 0.0);

    o.radius = 8.0;
    auto g = gaussian(n, k, 0.5);
    r = check_norm_invariance(*g, k, o);
    CHECK(r.critical.rel_error < 1e-5);
    CHECK(r.energy.rel_error < 1e-5);
  }
}

TEST_CASE("Laplacian conjugation") {
  {
    auto zero = zero_provider(3);
    const auto r = check_laplacian_conjugation(*zero, 1, Point{0.1, 0.2, 0.0});
    CHECK(r.exact_residual == 0.0);
    CHECK(r.fd_residual == 0.0);
  }
  // points whose image lies inside the bump's support
  const std::vector<Point> ys{{0.0, 0.05, 0.0}, {-0.2, 0.1, 0.1}, {0.15, -0.1, 0.05}};
  for (int x1p : {0, 2}) {
    auto v = bump(3, 0.6, 0.5, 8, x1p);
    for (const auto& y : ys) {
      const auto r1 = check_laplacian_conjugation(*v, 1, y, 1e-2);
      const auto r2 = check_laplacian_conjugation(*v, 1, y, 5e-3);
      CHECK(std::abs(r1.rhs) > 0.0);
      CHECK(r1.exact_residual <= 1e-10 * std::abs(r1.rhs));
      // second-order truncation: halving h divides the plain residual by about 4
      const double ratio = r1.fd_residual_h / r2.fd_residual_h;
      CHECK(ratio > 3.5);
      CHECK(ratio < 4.5);
      CHECK(r2.fd_residual <= 10.0 * r2.fd_error + 1e-9 * std::abs(r2.rhs));
      CHECK_FALSE(r1.ill_conditioned);
    }
  }
  // k = 2 through the composed series
  auto v = bump(5, 0.6, 0.5, 8);
  const auto r = check_laplacian_conjugation(*v, 2, Point{0.0, 0.05, 0.0, 0.0, 0.02});
  CHECK(r.exact_residual <= 1e-10 * std::abs(r.rhs));
  CHECK(r.fd_residual <= 1e-3 * std::abs(r.rhs));
}
