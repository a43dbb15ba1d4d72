#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "polycrit/bubbletree.hpp"
#include "polycrit/errors.hpp"
#include "polycrit/radialgebra.hpp"

using namespace polycrit;

namespace {

TreeConfig load(const std::string& name) {
  std::ifstream in(std::string(POLYCRIT_FIXTURES) + "/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return tree_from_json(ss.str());
}

BubbleSpec bubble(int n, int k, Point c, double mu) {
  BubbleSpec b;
  b.n = n;
  b.k = k;
  b.center = std::move(c);
  b.mu = mu;
  return b;
}

TreeConfig snapshot(int n, int k, std::vector<BubbleSpec> bs) {
  TreeConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.omega = {Point(n, 0.0), 1.0};
  cfg.bubbles = std::move(bs);
  cfg.validate();
  return cfg;
}

Point e1(int n, double t) {
  Point p(n, 0.0);
  p[0] = t;
  return p;
}

}  // namespace

TEST_CASE("structure relation") {
  const int n = 5, k = 1;
  auto same = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 0.1), bubble(n, k, Point(n, 0.0), 0.1)});
  CHECK(epsilon(same, 1, 2) == doctest::Approx(2.0).epsilon(1e-15));
  const double mu = 0.2;
  auto nested = snapshot(n, k, {bubble(n, k, Point(n, 0.0), mu), bubble(n, k, Point(n, 0.0), mu * mu)});
  CHECK(epsilon(nested, 1, 2) == doctest::Approx(mu + 1.0 / mu).epsilon(1e-14));
  auto apart = snapshot(n, k, {bubble(n, k, e1(n, 0.5), 0.1), bubble(n, k, e1(n, -0.5), 0.1)});
  CHECK(epsilon(apart, 1, 2) == doctest::Approx(102.0).epsilon(1e-14));
  CHECK_THROWS_AS(epsilon(apart, 1, 1), ParameterError);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5), lm(-6.0, -0.1);
  for (int t = 0; t < 200; ++t) {
    double m1 = std::pow(10.0, lm(rng)), m2 = std::pow(10.0, lm(rng));
    if (m2 > m1) std::swap(m1, m2);
    Point a(n), b(n);
    for (int c = 0; c < n; ++c) {
      a[c] = u(rng);
      b[c] = u(rng);
    }
    auto cfg = snapshot(n, k, {bubble(n, k, a, m1), bubble(n, k, b, m2)});
    CHECK(epsilon(cfg, 1, 2) == epsilon(cfg, 2, 1));
    CHECK(epsilon(cfg, 1, 2) >= 2.0);
  }
}

TEST_CASE("configuration validation") {
  const int n = 5, k = 1;
  CHECK_THROWS_AS(snapshot(n, k, {bubble(n, k, Point(n, 0.0), 0.01), bubble(n, k, Point(n, 0.0), 0.1)}),
                  ParameterError);
  CHECK_THROWS_AS(snapshot(n, k, {bubble(n, k, Point(n, 0.0), 1.5)}), ParameterError);
  CHECK_THROWS_AS(snapshot(n, k, {bubble(n, k, e1(n, 2.0), 0.1)}), ParameterError);
  FamilyLaw bad{10.0, {{1.0, -1.0, Point(n, 0.0)}}};
  CHECK_THROWS_AS(make_family(n, k, {Point(n, 0.0), 1.0}, bad), ParameterError);
}

TEST_CASE("classification invariants") {
  const int n = 6, k = 1;
  auto one = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 0.04)});
  auto d1 = classify(one);
  CHECK(d1.at(1).A.empty());
  CHECK(d1.at(1).r == doctest::Approx(0.2).epsilon(1e-15));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int t = 0; t < 50; ++t) {
    FamilyLaw law{std::pow(10.0, 2 + t % 3), {}};
    for (int b = 0; b < 4; ++b) {
      Point x(n);
      for (auto& v : x) v = u(rng);
      law.laws.push_back({1.0, 1.0 + 0.5 * b * (t % 2), x});
    }
    auto cfg = make_family(n, k, {Point(n, 0.0), 1.0}, law);
    auto data = classify(cfg);
    for (int i = 1; i <= 4; ++i) {
      const auto& e = data.at(i);
      std::vector<int> all = e.A;
      all.insert(all.end(), e.Ac.begin(), e.Ac.end());
      all.push_back(i);
      std::sort(all.begin(), all.end());
      CHECK(all == std::vector<int>{1, 2, 3, 4});
      for (int j = 1; j < i; ++j) CHECK(std::find(e.A.begin(), e.A.end(), j) != e.A.end());
      CHECK(e.r <= std::sqrt(cfg.bubble(i).mu) * (1 + 1e-15));
      for (int j : e.B) CHECK(std::find(e.Ac.begin(), e.Ac.end(), j) != e.Ac.end());
    }
  }
}

TEST_CASE("comparable pairs: radii and disjointness") {
  const int n = 7, k = 1;
  const double a = bubble_constant(n, k), mu = 1e-3, d = 1.0;
  auto cfg = snapshot(n, k, {bubble(n, k, e1(n, 0.5), mu), bubble(n, k, e1(n, -0.5), mu)});
  auto data = classify(cfg);
  const double s12 = data.at(1).s.at(2), s21 = data.at(2).s.at(1);
  CHECK(data.at(1).m.at(2) == doctest::Approx(2.0));
  // equal scales, m = 2
  CHECK(s12 == doctest::Approx(std::sqrt((mu * mu + a * d * d) / (8.0 * a))).epsilon(1e-14));
  CHECK(s12 + s21 < d);
  // the sum tends to d / sqrt(2), not d / 2
  CHECK((s12 + s21) / d == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-5));

  for (auto name : {"separated.json"}) {
    auto base = load(name);
    for (double alpha : {1e2, 1e3, 1e4}) {
      auto c = base.at_alpha(alpha);
      auto dd = classify(c);
      CHECK(dd.at(1).s.at(2) + dd.at(2).s.at(1) < distance(c.bubble(1).center, c.bubble(2).center));
      CHECK(dd.at(1).B.empty());
      CHECK(dd.at(2).B.empty());
    }
  }
}

TEST_CASE("family law: nested tower") {
  const int n = 7, k = 1;
  double prev_ratio = INFINITY;
  for (double alpha : {1e2, 1e3, 1e4, 1e5}) {
    FamilyLaw law{alpha, {{1.0, 1.0, Point(n, 0.0)}, {1.0, 2.0, Point(n, 0.0)}}};
    auto cfg = make_family(n, k, {Point(n, 0.0), 1.0}, law);
    auto data = classify(cfg);
    REQUIRE(data.at(1).B == std::vector<int>{2});
    const double rho = data.at(1).rho.at(2);
    CHECK(rho == doctest::Approx(2.0 * std::pow(alpha, -(n - 2.0 * k) / (2.0 * (n - 1))) / alpha).epsilon(1e-13));
    const double ratio = rho / data.at(1).r;
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
  CHECK(prev_ratio < 1e-2);
}

TEST_CASE("radius of influence grows against the scale") {
  for (auto name : {"tower.json", "separated.json"}) {
    CAPTURE(name);
    auto base = load(name);
    std::vector<double> prev(base.size(), 0.0);
    for (double alpha : {1e2, 1e3, 1e4, 1e5}) {
      auto cfg = base.at_alpha(alpha);
      auto data = classify(cfg);
      for (int i = 1; i <= cfg.size(); ++i) {
        const double q = data.at(i).r / cfg.bubble(i).mu;
        CHECK(q > prev[i - 1]);
        prev[i - 1] = q;
      }
    }
  }
}

TEST_CASE("snapshot classification") {
  const int n = 5, k = 1;
  auto far = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 0.1), bubble(n, k, e1(n, 0.5), 1e-4)});
  CHECK(classify(far).at(1).Ac == std::vector<int>{2});
  auto close = snapshot(n, k, {bubble(n, k, e1(n, -0.5), 0.1), bubble(n, k, e1(n, 0.5), 0.05)});
  CHECK(classify(close).at(2).A == std::vector<int>{1});
  CHECK(classify(close).at(1).A == std::vector<int>{2});
  auto amb = snapshot(n, k, {bubble(n, k, e1(n, -0.5), 0.1), bubble(n, k, e1(n, 0.5), 0.005)});
  try {
    classify(amb);
    FAIL("expected an ambiguity error");
  } catch (const AmbiguityError& e) {
    CHECK(std::string(e.what()).find("bubbles 1 and 2") != std::string::npos);
  }
}

TEST_CASE("dominance in the influence regions") {
  const int n = 7, k = 1;
  const double a = bubble_constant(n, k), q = 0.5 * (n - 2 * k);
  std::vector<double> sups;
  for (double mu : {1e-2, 1e-3}) {
    auto cfg = snapshot(n, k, {bubble(n, k, Point(n, 0.0), mu)});
    auto data = classify(cfg);
    const auto rep = check_dominance(cfg, data, 1, 0);
    // at |x - x^1| = sqrt(mu): (1 + B)/B = 1 + (mu + a)^q
    CHECK(rep.sup <= 1.0 + std::pow(mu + a, q));
    CHECK(rep.sup >= 1.0 + 0.5 * std::pow(mu + a, q));
    sups.push_back(rep.sup);
    const auto top = check_dominance(cfg, data, 1, 2 * k - 1);
    CHECK(std::isfinite(top.sup));
  }
  CHECK(sups[0] == doctest::Approx(sups[1]).epsilon(0.1));

  // adding a slower bubble far away barely changes the constant
  auto alone = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 1e-4)});
  auto pair = snapshot(n, k, {bubble(n, k, e1(n, 0.5), 0.1), bubble(n, k, Point(n, 0.0), 1e-4)});
  const double c0 = check_dominance(alone, classify(alone), 1, 0).sup;
  const double c1 = check_dominance(pair, classify(pair), 2, 0).sup;
  CHECK(c1 >= c0);
  CHECK(c1 < 1.1 * c0);

  auto empty = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 1e-2)});
  auto data = classify(empty);
  data.entries[0].region.holes.push_back({Point(n, 0.0), 1.0});
  CHECK_THROWS_AS(check_dominance(empty, data, 1, 0), ParameterError);
  CHECK_THROWS_AS(check_dominance(empty, classify(empty), 1, 2 * k), ParameterError);
}

TEST_CASE("higher bubbles dominate inside their rho-balls") {
  auto base = load("tower.json");
  for (double alpha : {1e2, 1e3, 1e4}) {
    auto cfg = base.at_alpha(alpha);
    auto data = classify(cfg);
    for (int l = 0; l <= 1; ++l) {
      const auto r = check_rho_dominance(cfg, data, 1, 2, l);
      CHECK(r.inside_min > 0.0);
      CHECK(std::isfinite(r.outside_max));
      CHECK(r.inside_min < INFINITY);
    }
  }
  CHECK_THROWS_AS(check_rho_dominance(base, classify(base), 2, 1, 0), ParameterError);
}

TEST_CASE("interaction estimates") {
  const int n = 7, k = 1;
  for (double alpha : {1e2, 1e4}) {
    FamilyLaw law{alpha, {{1.0, 1.0, Point(n, 0.0)}}};
    auto cfg = make_family(n, k, {Point(n, 0.0), 1.0}, law);
    const double mu = cfg.bubble(1).mu;
    const auto r = interaction_sup(cfg, classify(cfg), 1);
    // sup at the center: mu^{(n-2k)/2} + mu^{2k}
    CHECK(r.lhs == doctest::Approx(std::pow(mu, 0.5 * (n - 2 * k)) + std::pow(mu, 2.0 * k)).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-13));
  }
  for (auto name : {"tower.json", "separated.json"}) {
    CAPTURE(name);
    auto base = load(name);
    std::vector<double> first;
    for (double alpha : {1e2, 1e3, 1e4}) {
      auto cfg = base.at_alpha(alpha);
      auto data = classify(cfg);
      for (int i = 1; i <= cfg.size(); ++i) {
        const double ratio = interaction_sup(cfg, data, i).ratio;
        CHECK(std::isfinite(ratio));
        if (first.size() < static_cast<std::size_t>(i)) first.push_back(ratio);
        CHECK(ratio <= 2.0 * first[i - 1]);
      }
    }
  }
  auto snap = snapshot(n, k, {bubble(n, k, Point(n, 0.0), 0.1)});
  CHECK_THROWS_AS(interaction_sup(snap, classify(snap), 1), ParameterError);
}

TEST_CASE("bubble-tree evaluation") {
  const int n = 5, k = 2;
  const double mu = 0.01;
  auto cfg = snapshot(n, k, {bubble(n, k, Point(n, 0.0), mu)});
  CHECK(eval_tree(cfg, Point(n, 0.0), 0) == doctest::Approx(std::pow(mu, -0.5 * (n - 2 * k))).epsilon(1e-14));

  const Point x{0.01, 0.02, 0.0, -0.01, 0.0};
  const double base = eval_tree(cfg, x, 0);
  auto kernel = kernel_elements(n, k);
  double zmax = 0.0;
  for (const auto& z : kernel) {
    Point y = x;
    for (auto& v : y) v /= mu;
    zmax = std::max(zmax, std::abs(z->value(y)) * std::pow(mu, -0.5 * (n - 2 * k)));
  }
  auto perturbed = cfg;
  perturbed.nu = {{}, std::vector<double>(n + 1, 1e-3)};
  CHECK(std::abs(eval_tree(perturbed, x, 0) - base) <= 1e-3 * (n + 1) * zmax * (1 + 1e-12));
  // linear in nu
  auto twice = cfg;
  twice.nu = {{}, std::vector<double>(n + 1, 2e-3)};
  CHECK(eval_tree(twice, x, 0) - base == doctest::Approx(2.0 * (eval_tree(perturbed, x, 0) - base)).epsilon(1e-10));

  auto with_u0 = cfg;
  with_u0.include_u0 = true;
  with_u0.u0_constant = 0.5;
  CHECK(eval_tree(with_u0, x, 0) == doctest::Approx(base + 0.5).epsilon(1e-14));
  CHECK(eval_tree(with_u0, x, 1) == doctest::Approx(eval_tree(cfg, x, 1)).epsilon(1e-14));

  auto bad = cfg;
  bad.nu = {{1.0}};
  CHECK_THROWS_AS(eval_tree(bad, x, 0), UnsupportedError);
  auto ext = cfg;
  ext.bubbles[0].profile = kernel[0];
  ext.nu = {{}, {1.0}};
  CHECK_THROWS_AS(eval_tree(ext, x, 0), UnsupportedError);

  // |grad^l W| <= C (1 + sum theta^{-l} B) with a finite measured C
  auto tower = load("tower.json").at_alpha(1e2);
  tower.nu = {{}, {1e-2, 0, 0, 0, 0, 0, 0, 0}, {0, 1e-2}};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int l = 0; l <= 2 * tower.k - 1; ++l) {
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
      Point y = tower.bubble(1).center;
      const double scale = std::pow(10.0, -4.0 * s / 200.0);
      for (auto& v : y) v += scale * u(rng);
      double w = 1.0;
      for (const auto& b : tower.bubbles) w += std::pow(theta(b, y), -l) * positive_bubble(b, y);
      worst = std::max(worst, eval_tree(tower, y, l) / w);
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1e3);
  }
}

TEST_CASE("json round trip") {
  auto cfg = load("tower.json");
  cfg.nu = {{}, {0.1, 0.2}};
  const auto back = tree_from_json(to_json(cfg));
  REQUIRE(back.size() == cfg.size());
  for (int i = 1; i <= cfg.size(); ++i) {
    CHECK(back.bubble(i).mu == cfg.bubble(i).mu);
    CHECK(back.bubble(i).center == cfg.bubble(i).center);
  }
  CHECK(back.nu == cfg.nu);
  CHECK(back.family_law->alpha == cfg.family_law->alpha);
  auto snap = snapshot(5, 1, {bubble(5, 1, Point(5, 0.0), 0.1)});
  CHECK(tree_from_json(to_json(snap)).bubble(1).mu == 0.1);
  CHECK_THROWS_AS(tree_from_json("{not json"), ParameterError);
  CHECK_THROWS_AS(tree_from_json(R"({"n": 5})"), ParameterError);
  const auto info = to_json(classify(cfg));
  CHECK(info.find("\"rho\"") != std::string::npos);
  CHECK_NOTHROW(classify(cfg).at(2).region.domain());
}
