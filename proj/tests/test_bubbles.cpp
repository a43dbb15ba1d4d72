#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "polycrit/bubbles.hpp"
#include "polycrit/errors.hpp"
#include "polycrit/radialgebra.hpp"

using namespace polycrit;

namespace {

const Domain kUnitBall3(Ball{Point(3, 0.0), 1.0});

Domain unit_ball(int n) { return Domain(Ball{Point(n, 0.0), 1.0}); }

BubbleSpec interior(int n, int k, Point c, double mu) {
  BubbleSpec s;
  s.n = n;
  s.k = k;
  s.center = std::move(c);
  s.mu = mu;
  return s;
}

// Sixth-order central difference of g along coordinate v.
template <class G>
double fd6(G g, Point x, int v, double h) {
  static const double w[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  double s = 0.0;
  const double x0 = x[v];
  for (int m = 1; m <= 3; ++m) {
    x[v] = x0 + m * h;
    const double up = g(x);
    x[v] = x0 - m * h;
    s += w[m - 1] * (up - g(x));
  }
  return s / h;
}

}  // namespace

TEST_CASE("theta and positive bubbles") {
  auto s = interior(3, 1, {0.1, 0.0, 0.0}, 0.1);
  CHECK(theta(s, s.center) == doctest::Approx(0.1));
  CHECK(theta(s, Point{1.1, 0.0, 0.0}) == doctest::Approx(1.1));
  CHECK(positive_bubble(s, s.center) == doctest::Approx(std::pow(0.1, -0.5)));
  std::vector<BubbleSpec> list{s};
  CHECK(positive_bubble(list, 0, Point{0.3, 0.2, 0.1}) == 1.0);
  CHECK(positive_bubble(list, 1, s.center) == positive_bubble(s, s.center));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Point x{u(rng), u(rng), u(rng)};
    CHECK(theta(s, x) >= s.mu);
  }
}

TEST_CASE("positive bubble is comparable to mu^q theta^{2k-n}") {
  for (auto [n, k] : {std::pair{5, 1}, std::pair{7, 2}}) {
    for (double mu : {1e-1, 1e-3}) {
      auto s = interior(n, k, Point(n, 0.0), mu);
      double lo = INFINITY, hi = 0.0;
      for (double r = 0.0; r < 10.0; r = r * 1.3 + 1e-5) {
        Point x(n, 0.0);
        x[0] = r;
        const double ratio =
            positive_bubble(s, x) / (std::pow(mu, 0.5 * (n - 2 * k)) * std::pow(theta(s, x), 2.0 * k - n));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      CHECK(lo > 0.0);
      CHECK(std::isfinite(hi));
      // the constants do not depend on mu
      CHECK(hi / lo < std::pow(1.0 / bubble_constant(n, k) + 4.0, n));
    }
  }
}

TEST_CASE("cutoff plateaus and monotonicity") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(0.5) == 1.0);
  CHECK(cutoff(1.0) == 0.0);
  CHECK(cutoff(3.0) == 0.0);
  double prev = 1.0;
  for (double r = 0.5; r <= 1.0; r += 1e-3) {
    const double c = cutoff(r);
    CHECK(c >= 0.0);
    CHECK(c <= prev);
    prev = c;
  }
  CHECK(cutoff(0.75) == doctest::Approx(0.5));
}

TEST_CASE("interior bubble values") {
  auto s = interior(3, 1, {0.2, 0.0, 0.0}, 0.01);
  CHECK(eval_V(s, Point{-0.9, 0.0, 0.0}, kUnitBall3) == 0.0);
  CHECK(eval_V(s, s.center, kUnitBall3) == doctest::Approx(std::pow(0.01, -0.5)));

  // where the cutoff is 1, mu^q V(x_a + mu y) = v(y) for every mu
  const Point y{0.7, -1.1, 2.0};
  for (double mu : {0.01, 0.005}) {
    s.mu = mu;
    Point x = s.center;
    for (int i = 0; i < 3; ++i) x[i] += mu * y[i];
    CHECK(std::sqrt(mu) * eval_V(s, x, kUnitBall3) == doctest::Approx(standard_bubble(3, 1, norm(y))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(eval_V(interior(3, 1, {1.2, 0.0, 0.0}, 0.1), s.center, kUnitBall3), ParameterError);
  CHECK_THROWS_AS(eval_V(s, s.center, Domain(HalfBall{Point(3, 0.0), 1.0})), UnsupportedError);
}

TEST_CASE("bubble energy approaches the profile energy as mu shrinks") {
  for (auto [n, k] : {std::pair{3, 1}, std::pair{5, 2}}) {
    // |grad^k B|^2 integrates to int B^{2#} = int (1 + a r^2)^{-n}
    RadialFunction crit(n, 2 * n);
    crit.add_term(LaurentPoly(1), 0, 0);
    const double target = crit.integrate(bubble_constant(n, k));
    const Domain omega = unit_ball(n);
    double prev = INFINITY;
    for (double mu : {1e-1, 1e-2, 1e-3}) {
      Point c(n, 0.0);
      c[1] = 0.25;
      auto s = interior(n, k, c, mu);
      Integrand f;
      f.add_radial(
          c,
          [&](double r) {
            Point x = c;
            x[0] += r;
            const Jet J = bubble_jet(s, x, k, omega);
            if (k % 2 == 0) return std::pow(J.laplacian_power(k / 2), 2);
            const Point g = J.grad_laplacian_power(k / 2);
            return dot(g, g);
          },
          0.0, mu);
      const double e = integrate_volume(f, omega).value;
      const double dev = std::abs(e - target) / target;
      CAPTURE(n);
      CAPTURE(mu);
      // the deviation is O(mu^{n-2k})
      CHECK(dev < 0.3 * prev);
      prev = dev;
    }
  }
}

TEST_CASE("bubble jets agree with finite differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto [n, k] : {std::pair{3, 1}, std::pair{5, 2}}) {
    const Domain omega = unit_ball(n);
    Point c(n, 0.0);
    c[0] = 0.1;
    auto s = interior(n, k, c, 0.3);
    const int L = 2 * k;
    for (int trial = 0; trial < 20; ++trial) {
      Point x(n);
      // half the points in the cutoff transition region
      const double rad = trial % 2 ? 0.3 * std::abs(u(rng)) : 0.45 + 0.4 * std::abs(u(rng));
      Point dir(n);
      for (auto& v : dir) v = u(rng);
      const double nd = norm(dir);
      for (int i = 0; i < n; ++i) x[i] = c[i] + rad * 0.9 * dir[i] / nd;
      const Jet J = bubble_jet(s, x, L, omega);
      CHECK(J.value() == doctest::Approx(eval_V(s, x, omega)).epsilon(1e-13));
      const auto& set = J.set();
      const double h = 1e-3;
      for (int i = 1; i < set.size(); ++i) {
        auto alpha = set.alpha(i);
        int v = 0;
        while (alpha[v] == 0) ++v;
        std::vector<int> lower(alpha.begin(), alpha.end());
        lower[v] -= 1;
        const int deg = set.degree(i);
        auto g = [&](const Point& p) {
          return deg == 1 ? eval_V(s, p, omega) : bubble_jet(s, p, deg - 1, omega).partial(lower);
        };
        const double fd = fd6(g, x, v, h);
        double scale = 0.0;
        for (int m = set.degree_begin(deg); m < set.degree_begin(deg + 1); ++m)
          scale = std::max(scale, std::abs(J.partials()[m]));
        CHECK(std::abs(fd - J.partials()[i]) <= 1e-8 * std::max(scale, 1.0));
      }
    }
  }
}

TEST_CASE("bubble jet basics") {
  auto s = interior(5, 2, Point(5, 0.0), 0.2);
  const Domain omega = unit_ball(5);
  const Jet J = bubble_jet(s, s.center, 4, omega);
  for (double g : J.gradient()) CHECK(std::abs(g) < 1e-14);
  CHECK_THROWS_AS(bubble_jet(s, s.center, 5, omega), ParameterError);
  auto off = s;
  off.center[0] = 0.5;
  Point far(5, 0.0);
  far[0] = -0.2;
  CHECK(bubble_jet(off, far, 4, omega).value() == 0.0);

  // an external profile equal to the standard bubble gives the same jet
  const double a = bubble_constant(5, 2);
  auto ext = std::make_shared<TaylorJetProvider>(5, 64, [a](std::span<const Taylor> y) {
    Taylor r2(y[0].set_ptr());
    for (const auto& v : y) r2 += v * v;
    return pow(1.0 + a * r2, -0.5);
  });
  auto e = s;
  e.profile = ext;
  Point x{0.05, -0.1, 0.02, 0.2, 0.31};
  const Jet A = bubble_jet(s, x, 4, omega), B = bubble_jet(e, x, 4, omega);
  for (std::size_t i = 0; i < A.partials().size(); ++i)
    CHECK(B.partials()[i] == doctest::Approx(A.partials()[i]).epsilon(1e-11));
}

TEST_CASE("boundary chart") {
  const Ball omega{Point(4, 0.0), 1.0};
  const Point x0{0.0, 0.6, 0.0, 0.8};
  const BoundaryChart chart(omega, x0);
  const Point at0 = chart.to_ball(Point(4, 0.0));
  for (int i = 0; i < 4; ++i) CHECK(at0[i] == doctest::Approx(x0[i]).epsilon(1e-15));
  // d sigma(0)[-e_1] is the outer normal and d sigma(0) is an isometry
  const double h = 1e-6;
  std::vector<Point> cols;
  for (int j = 0; j < 4; ++j) {
    Point zp(4, 0.0), zm(4, 0.0);
    zp[j] = h;
    zm[j] = -h;
    const Point a = chart.to_ball(zp), b = chart.to_ball(zm);
    Point c(4);
    for (int i = 0; i < 4; ++i) c[i] = (a[i] - b[i]) / (2 * h);
    cols.push_back(c);
  }
  for (int i = 0; i < 4; ++i) CHECK(-cols[0][i] == doctest::Approx(x0[i]).epsilon(1e-8));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(dot(cols[i], cols[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
  // round trip, and depth > 0 lands inside
  const Point z{0.3, 0.2, -0.4, 0.1};
  const Point x = chart.to_ball(z);
  CHECK(norm(x) < 1.0);
  const Point back = chart.to_chart(x);
  for (int i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(z[i]).epsilon(1e-13));
}

TEST_CASE("boundary bubble values") {
  BubbleSpec s = interior(4, 1, {0.0, 1.0, 0.0, 0.0}, 0.05);
  s.kind = BubbleKind::boundary;
  const Domain omega = unit_ball(4);
  CHECK(eval_V(s, s.center, omega) == doctest::Approx(1.0 / 0.05));
  CHECK(eval_V(s, Point{0.0, -1.0, 0.0, 0.0}, omega) == 0.0);
  CHECK_THROWS_AS(bubble_jet(s, s.center, 1, omega), UnsupportedError);
  CHECK_THROWS_AS(eval_V(s, s.center, Domain(Ball{Point(4, 0.0), 0.5})), UnsupportedError);
  s.center = {0.0, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(eval_V(s, s.center, omega), ParameterError);
}

TEST_CASE("decay slopes of bubble derivatives") {
  const std::vector<double> radii{1e3, 1e4, 1e5};
  auto r = check_decay(7, 1, 0, radii);
  CHECK(r.slope == doctest::Approx(-5.0).epsilon(0.01));
  CHECK(r.deviation < 0.05);
  r = check_decay(5, 2, 1, radii);
  CHECK(r.slope == doctest::Approx(-2.0).epsilon(0.025));
  for (auto [n, k] : {std::pair{3, 1}, std::pair{6, 2}, std::pair{9, 3}})
    for (int l = 0; l < 2 * k; ++l) {
      CAPTURE(n);
      CAPTURE(l);
      CHECK(check_decay(n, k, l, radii).deviation < 0.05);
    }
  // the order-0 slope tends to 2k - n exactly
  const std::vector<double> far{1e6, 1e7};
  CHECK(check_decay(7, 1, 0, far).deviation < 1e-9);
}

TEST_CASE("kernel elements solve the linearized equation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (auto [n, k] : {std::pair{3, 1}, std::pair{5, 2}, std::pair{7, 2}}) {
    const auto Z = kernel_elements(n, k);
    REQUIRE(Z.size() == static_cast<std::size_t>(n + 1));
    const double q = 0.5 * (n - 2 * k);
    const double crit = 2.0 * n / (n - 2 * k);
    CHECK(Z[0]->value(Point(n, 0.0)) == doctest::Approx(q));
    for (int i = 1; i <= n; ++i) CHECK(Z[i]->value(Point(n, 0.0)) == 0.0);
    for (int trial = 0; trial < 20; ++trial) {
      Point x(n);
      for (auto& v : x) v = u(rng);
      const double B = standard_bubble(n, k, norm(x));
      for (const auto& z : Z) {
        const Jet J = z->jet(x, 2 * k);
        const double rhs = (crit - 1.0) * std::pow(B, crit - 2.0) * J.value();
        CHECK(std::abs(J.laplacian_power(k) - rhs) < 1e-8);
        // finite-difference Laplacian of (-Delta)^{k-1} Z
        double lap = 0.0;
        for (int v = 0; v < n; ++v) {
          auto g = [&](const Point& p) { return z->jet(p, 2 * k - 1).grad_laplacian_power(k - 1)[v]; };
          lap += fd6(g, x, v, 1e-3);
        }
        CHECK(std::abs(-lap - rhs) < 1e-8);
      }
      // Z_0 = q B + x . grad B from the bubble itself
      auto s = interior(n, k, Point(n, 0.0), 1.0);
      const Jet JB = bubble_jet(s, x, 1, Domain(Ball{Point(n, 0.0), 1e3}));
      CHECK(Z[0]->value(x) == doctest::Approx(q * B + dot(x, JB.gradient())).epsilon(1e-12));
      CHECK(Z[1]->value(x) == doctest::Approx(JB.gradient()[0]).epsilon(1e-12));
    }
  }
}

TEST_CASE("I_A for the standard bubble") {
  using T = LowerOrderTensor;
  CHECK(compute_IA(T::isotropic(0.0), 7, 1, 0, false) == 0.0);
  CHECK(compute_IA(T::isotropic(2.0), 9, 2, 1, false) > 0.0);
  CHECK(compute_IA(T::isotropic(-2.0), 9, 2, 1, true) < 0.0);

  // (7,1), p = 0: quadrature of B^2 with an analytic tail
  const int n = 7;
  const double a = bubble_constant(n, 1);
  const double R = 1e4;
  auto q = integrate_radial([&](double r) { return std::pow(standard_bubble(n, 1, r), 2); }, R, n);
  const double tail = sphere_area(n) * std::pow(a, -5.0) * std::pow(R, -3.0) / 3.0;
  CHECK(compute_IA(T::isotropic(1.0), n, 1, 0, false) == doctest::Approx(q.value + tail).epsilon(1e-8));

  // scale covariance: quadrature of the rescaled bubble
  const double mu = 0.5;
  auto qm = integrate_radial(
      [&](double r) { return std::pow(std::pow(mu, -2.5) * standard_bubble(n, 1, r / mu), 2); }, R, n);
  CHECK(compute_IA(T::isotropic(1.0), n, 1, 0, false, mu) == doctest::Approx(qm.value).epsilon(1e-8));
  CHECK(compute_IA(T::isotropic(1.0), n, 1, 0, false, mu) ==
        doctest::Approx(mu * mu * compute_IA(T::isotropic(1.0), n, 1, 0, false)).epsilon(1e-12));

  CHECK_THROWS_AS(compute_IA(T::isotropic(1.0), 6, 2, 1, false), DivergentIntegralError);
  CHECK_THROWS_AS(compute_IA(T::isotropic(1.0), 9, 2, 2, false), ParameterError);
  CHECK(compute_IA(T::isotropic(1.0), 9, 2, 1, true) ==
        doctest::Approx(0.5 * compute_IA(T::isotropic(1.0), 9, 2, 1, false)));
}

TEST_CASE("diagonal I_A agrees with axial quadrature") {
  // p = 1: int (d_1 B)^2 by an axial reduction about e_1
  {
    const int n = 9, k = 2;
    const auto Z = kernel_elements(n, k);  // Z_1 = d_1 B
    const Point c(n, 0.0), e = unit_vector(n, 0);
    auto d1 = integrate_axial_shell(
        [&](std::span<const double> x, std::span<double> out) { out[0] = std::pow(Z[1]->value(x), 2); }, 1, n, c, e,
        0.0, 1.0);
    double tot = d1[0].value;
    for (double lo = 1.0; lo < 1e4; lo *= 2)
      tot += integrate_axial_shell(
                 [&](std::span<const double> x, std::span<double> out) { out[0] = std::pow(Z[1]->value(x), 2); }, 1,
                 n, c, e, lo, 2 * lo)[0]
                 .value;
    std::vector<double> diag(n, 0.0);
    diag[0] = 1.0;
    CHECK(compute_IA(LowerOrderTensor::diagonal(diag), n, k, 1, false) == doctest::Approx(tot).epsilon(1e-8));
    diag = {2.0, 1.0, 0.5, 0, 0, 0, 0, 0, 0};
    CHECK(compute_IA(LowerOrderTensor::diagonal(diag), n, k, 1, false) == doctest::Approx(3.5 * tot).epsilon(1e-8));
  }
  // p = 2: c1 = int (d_11 B)^2 by an axial reduction, c2 from the full Hessian norm
  {
    const int n = 9, k = 3;
    const double a = bubble_constant(n, k);
    auto hess = [&](std::span<const double> x) {
      auto X = Taylor::variables(x, 2);
      Taylor s(X[0].set_ptr());
      for (const auto& v : X) s += v * v;
      return Jet::from_taylor(pow(1.0 + a * s, -1.5));
    };
    const Point c(n, 0.0), e = unit_vector(n, 0);
    auto field = [&](std::span<const double> x, std::span<double> out) {
      const Jet J = hess(x);
      std::vector<int> a11(n, 0);
      a11[0] = 2;
      out[0] = std::pow(J.partial(a11), 2);
      out[1] = std::pow(J.tensor_norm(2), 2);
    };
    double c11 = 0.0, full = 0.0;
    for (double lo = 0.0; lo < 1e12; lo = lo == 0.0 ? 1.0 : 4 * lo) {
      auto r = integrate_axial_shell(field, 2, n, c, e, lo, lo == 0.0 ? 1.0 : 4 * lo);
      c11 += r[0].value;
      full += r[1].value;
    }
    const double c12 = (full - n * c11) / (n * (n - 1.0));
    CHECK(compute_IA(LowerOrderTensor::isotropic(1.0), n, k, 2, false) == doctest::Approx(full).epsilon(1e-8));
    std::vector<double> d{1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5};
    double s2 = 0.0, s1 = 0.0;
    for (double v : d) {
      s1 += v;
      s2 += v * v;
    }
    const double oracle = c11 * s2 + c12 * (s1 * s1 - s2);
    CHECK(compute_IA(LowerOrderTensor::diagonal(d), n, k, 2, false) == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("sign condition verdicts") {
  using T = LowerOrderTensor;
  std::vector<T> pos{T::isotropic(1.0), T::isotropic(0.3), T::diagonal({1.0, 2.0, 0, 0, 0, 0, 0, 0, 0})};
  auto r = check_sign_condition(pos, 9, 2, 1);
  CHECK(r.verdict == SignVerdict::positive);
  CHECK(r.values.size() == 6);
  std::vector<T> neg{T::isotropic(-1.0)};
  CHECK(check_sign_condition(neg, 9, 2, 1).verdict == SignVerdict::negative);
  std::vector<T> mixed{T::isotropic(1.0), T::isotropic(-1.0)};
  r = check_sign_condition(mixed, 9, 2, 1);
  CHECK(r.verdict == SignVerdict::violated);
  CHECK(r.witness == 2);
  std::vector<T> zero{T::isotropic(0.0)};
  CHECK(check_sign_condition(zero, 9, 2, 1).verdict == SignVerdict::violated);
}

TEST_CASE("bubble json") {
  auto s = interior(5, 2, {0.1, 0.0, 0.0, 0.0, -0.2}, 0.01);
  const auto back = bubble_from_json(to_json(s));
  CHECK(back.n == 5);
  CHECK(back.k == 2);
  CHECK(back.center == s.center);
  CHECK(back.mu == s.mu);
  CHECK(back.kind == BubbleKind::interior);
  CHECK_THROWS_AS(bubble_from_json(R"({"kind":"interior","n":4,"k":2,"center":[0,0,0,0],"mu":1})"), ParameterError);
  CHECK_THROWS_AS(bubble_from_json("not json"), ParameterError);
}
