#include <doctest.h>

#include "polycrit/errors.hpp"
#include "suites.hpp"

using namespace polycrit;

TEST_CASE("check bookkeeping") {
  suites::SuiteResult r;
  CHECK_FALSE(r.passed("x"));
  r.record("x", "a", 1e-3, 1e-2);
  r.record("x", "nan", NAN, 1.0);
  r.require("y", "b", true);
  CHECK(r.passed("y"));
  CHECK_FALSE(r.passed("x"));
  CHECK_FALSE(r.passed());
  REQUIRE(r.failures().size() == 1);
  CHECK(r.failures()[0].rfind("x nan", 0) == 0);
  r.findings.push_back({"z", "c", false, 1.0, 0.0});
  CHECK(r.checks_json()["findings"].size() == 1);

  suites::SuiteResult ok;
  ok.record("x", "a", 0.0, 0.0);
  CHECK(ok.passed());
  ok.accuracy_failures.push_back("quadrature");
  CHECK_FALSE(ok.passed());
}

TEST_CASE("suite preconditions") {
  CHECK_THROWS_AS(suites::bubble_check({.pairs = {{4, 2}}}), ParameterError);
  CHECK_THROWS_AS(suites::cayley_green({.pairs = 0}), ParameterError);
  CHECK_THROWS_AS(suites::pohozaev({.suite = "nope"}), ParameterError);
  CHECK_THROWS_AS(suites::pohozaev({.pairs = {{2, 4}}}), ParameterError);
  CHECK_THROWS_AS(suites::solve({.mu_grid = {}}), ParameterError);
  CHECK_THROWS_AS(suites::solve({.params = {9, 2, 0, 0.0}}), ParameterError);
}

TEST_CASE("threads do not change results") {
  const auto one = suites::bubble_check({.pairs = {{7, 1}, {5, 2}, {9, 3}}, .jobs = 1});
  const auto four = suites::bubble_check({.pairs = {{7, 1}, {5, 2}, {9, 3}}, .jobs = 4});
  CHECK(one.passed());
  CHECK(one.checks_json() == four.checks_json());
}
