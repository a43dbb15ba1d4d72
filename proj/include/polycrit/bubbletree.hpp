#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polycrit/bubbles.hpp"
#include "polycrit/quad.hpp"

namespace polycrit {

// Bubble indices are 1-based throughout; index 0 is the constant slot B^0 = 1.

// mu(alpha) = c alpha^{-gamma}, x(alpha) = x_inf + alpha^{-delta} d.
struct PowerLaw {
  double c = 1.0;
  double gamma = 1.0;
  Point x_inf;
  double delta = 0.0;
  Point d;
  BubbleKind kind = BubbleKind::interior;
};

struct FamilyLaw {
  double alpha = 1.0;
  std::vector<PowerLaw> laws;
};

struct SnapshotOptions {
  double threshold = 1e-2;  // mu_j / mu_i below this reads as mu_j = o(mu_i)
  double band = 10.0;       // ratios in [threshold, band * threshold) are ambiguous
};

struct TreeConfig {
  int n = 3;
  int k = 1;
  Ball omega{Point(3, 0.0), 1.0};
  std::vector<BubbleSpec> bubbles;
  std::vector<std::vector<double>> nu;  // nu[i][j], i = 0..N; may be empty
  bool include_u0 = false;
  double u0_constant = 0.0;
  std::shared_ptr<const JetProvider> u0;  // overrides u0_constant when set
  std::optional<FamilyLaw> family_law;
  SnapshotOptions snapshot;

  int size() const { return static_cast<int>(bubbles.size()); }
  const BubbleSpec& bubble(int i) const { return bubbles.at(i - 1); }
  // Checks dimensions, scales in (0,1) and mu^N <= ... <= mu^1.
  void validate() const;
  // The configuration at another alpha (family-law mode only).
  TreeConfig at_alpha(double alpha) const;
};

// Builds the bubbles from a family law and validates.
TreeConfig make_family(int n, int k, Ball omega, FamilyLaw law);

std::string to_json(const TreeConfig& cfg);
TreeConfig tree_from_json(const std::string& text);

// |x^i - x^j|^2/(mu^i mu^j) + mu^i/mu^j + mu^j/mu^i
double epsilon(const TreeConfig& cfg, int i, int j);

// A ball punctured by balls, intersected with the domain ball.
struct InfluenceRegion {
  Ball ball;
  std::vector<Ball> holes;
  Ball omega;

  bool contains(std::span<const double> x) const;
  // The region as a quadrature domain; needs the holes inside the ball and the ball inside omega.
  Domain domain() const;
};

struct InfluenceEntry {
  std::vector<int> A, Ac, B;
  std::map<int, double> s;    // s^{ij} for j in A_i
  std::map<int, double> m;    // m_{ij} for comparable j
  std::map<int, double> rho;  // rho^{ji} for j in B_i
  double r = 0.0;
  InfluenceRegion region;
};

struct InfluenceData {
  std::vector<InfluenceEntry> entries;  // entries[i - 1]
  const InfluenceEntry& at(int i) const { return entries.at(i - 1); }
};

InfluenceData classify(const TreeConfig& cfg);
std::string to_json(const InfluenceData& data);

struct SampleOptions {
  int count = 4096;
  std::uint64_t seed = 0;
};

// Points of the region of bubble i: shells of radius mu^i 2^t about x^i plus a uniform background.
std::vector<Point> sample_region(const TreeConfig& cfg, const InfluenceData& data, int i, const SampleOptions& opts);

struct DominanceReport {
  int l;
  double sup;  // sup of (1 + sum_j theta_j^{-l} B_j)/(theta_i^{-l} B_i)
  int samples;
};

DominanceReport check_dominance(const TreeConfig& cfg, const InfluenceData& data, int i, int l,
                                const SampleOptions& opts = {});

struct InteractionReport {
  double lhs;
  double bound;
  double ratio;
};

// Family-law mode only.
InteractionReport interaction_sup(const TreeConfig& cfg, const InfluenceData& data, int i,
                                  const SampleOptions& opts = {});

// For j in B_i: min of theta_j^{-l}B_j/(theta_i^{-l}B_i) inside B(x^j, rho^{ji}) and max outside it.
struct RhoReport {
  double inside_min;
  double outside_max;
};
RhoReport check_rho_dominance(const TreeConfig& cfg, const InfluenceData& data, int i, int j, int l,
                              const SampleOptions& opts = {});

// Magnitude of the order-l derivative tensor of u_0 + sum V^i + sum nu^{ij} Z^{ij} at x.
double eval_tree(const TreeConfig& cfg, std::span<const double> x, int l);

}  // namespace polycrit
