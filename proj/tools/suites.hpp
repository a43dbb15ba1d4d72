#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "polycrit/bubbletree.hpp"
#include "polycrit/radialsolver.hpp"

namespace polycrit::suites {

struct Check {
  std::string group;  // e.g. "identity", "decay"
  std::string label;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
};

struct SuiteResult {
  std::vector<Check> checks;
  std::vector<Check> findings;  // reported, never gating
  std::vector<std::string> accuracy_failures;
  nlohmann::ordered_json report = nlohmann::ordered_json::object();
  std::map<std::string, std::string> files;  // extra outputs, name -> contents

  // passes when value <= limit
  void record(std::string group, std::string label, double value, double limit);
  void require(std::string group, std::string label, bool ok, double value = 0.0, double limit = 0.0);
  bool passed() const;
  bool passed(const std::string& group) const;
  std::vector<std::string> failures() const;
  nlohmann::ordered_json checks_json() const;
};

struct BubbleCheckConfig {
  std::vector<std::pair<int, int>> pairs;  // (n, k); empty means 2k < n <= 12, k <= 4
  std::vector<double> radii{0.0, 0.5, 1.0, 2.0, 10.0};
  double numeric_tol = 1e-9;
  std::vector<double> decay_radii{1e3, 1e4, 1e5};
  double slope_tol = 0.05;
  int jobs = 1;
};
SuiteResult bubble_check(const BubbleCheckConfig& cfg);

struct CayleyGreenConfig {
  int n = 3;
  int k = 1;
  int pairs = 100;
  std::uint64_t seed = 0;
  double invariance_tol = 1e-5;
  double distance_tol = 1e-12;
  double green_tol = 1e-10;
};
SuiteResult cayley_green(const CayleyGreenConfig& cfg);

struct TreeSuiteConfig {
  TreeConfig tree;
  std::vector<double> alphas{1e2, 1e3, 1e4};  // family sweep, ignored for snapshots
  std::uint64_t seed = 0;
  double interaction_growth = 2.0;  // allowed ratio growth over the sweep
};
SuiteResult tree(const TreeSuiteConfig& cfg);

struct PohozaevSuiteConfig {
  std::vector<std::pair<int, int>> pairs;  // (k, n); empty means k in 1..3, n in {3,5,7}, n > 2k
  std::string suite = "manufactured";     // or "bubble"
  double tol = 1e-6;
  int jobs = 1;
};
SuiteResult pohozaev(const PohozaevSuiteConfig& cfg);

struct LemmaSuiteConfig {
  std::vector<double> alphas{1e1, 1e2, 1e3};  // mu = 1/alpha
  std::uint64_t seed = 0;
  double error_fraction = 0.05;
  double growth = 1.5;  // the last ratio may exceed the earlier maximum by this factor
};
SuiteResult lemmas(const LemmaSuiteConfig& cfg);

struct SolveConfig {
  ProblemParams params{7, 1, 0, 0.0};
  std::vector<double> mu_grid{-0.5, -0.25, -0.1, -0.05, -0.02};
  std::vector<double> seed_d;  // initial guess at the first grid point; k = 1 scans when empty
  double scan_lo = 10.0;
  double scan_hi = 1e6;
  double fit_tol = 5e-2;
  double slope_tol = 0.2;
};
SuiteResult solve(const SolveConfig& cfg);

// Exact bubble branches for (k, p) at the given n.
SuiteResult synthetic_scaling(const std::vector<std::tuple<int, int, int>>& nkp, double slope_tol = 0.05);

}  // namespace polycrit::suites
