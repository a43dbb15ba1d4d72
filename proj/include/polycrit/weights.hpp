#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polycrit/bubbletree.hpp"
#include "polycrit/jet.hpp"
#include "polycrit/quad.hpp"

namespace polycrit {

// Sum over i of theta_i^{2-2k} B_i plus sum over i != j in 0..N of B_j^{2#-2} B_i, with B_0 = 1.
double psi_weight(const TreeConfig& cfg, std::span<const double> y);

// 1 + sum_i theta_i^{-l} B_i
double weight_denominator(const TreeConfig& cfg, std::span<const double> y, int l);

struct GridOptions {
  int count = 2048;  // uniform background points
  int per_shell = 8;
  std::uint64_t seed = 0;
};

// Points of the closed domain: the domain center, every bubble center, shells of
// radius mu_i 2^t about each center, and a uniform background.
std::vector<Point> weight_grid(const TreeConfig& cfg, const GridOptions& opts = {});

struct WeightProfile {
  TreeConfig cfg;
  std::vector<Point> grid;
  double eta = 1.0;

  WeightProfile(TreeConfig cfg, std::vector<Point> grid, double eta);
};

// Max over the grid of sum_{l < 2k} |nabla^l phi| / (1 + sum theta^{-l} B).
double star_norm(const JetProvider& phi, const TreeConfig& cfg, std::span<const Point> grid);
// Max over the grid of |R| / (Psi + eta sum_{i=0}^N B_i^{2#-1}).
double starstar_norm(const ScalarField& R, const TreeConfig& cfg, std::span<const Point> grid, double eta);

inline double star_norm(const JetProvider& phi, const WeightProfile& w) { return star_norm(phi, w.cfg, w.grid); }
inline double starstar_norm(const ScalarField& R, const WeightProfile& w) {
  return starstar_norm(R, w.cfg, w.grid, w.eta);
}

struct EtaOptions {
  int x_samples = 24;  // points where the convolution bound is probed
  std::uint64_t seed = 0;
  QuadOptions quad{.tol = 5e-2, .seed = 0, .replicates = 8, .points = 1 << 14};
};

struct EtaSequences {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double eta4 = 0.0;
  double eta = 0.0;
};

double eta3(const TreeConfig& cfg);
// max(|nu_max|, max |nu^{ij}|) + sum of the coefficient distances.
double eta4(const TreeConfig& cfg, std::span<const double> A_deltas, double nu_max);
// L^{2n/(n+2k)} norm of Psi over the domain.
QuadratureResult eta1(const TreeConfig& cfg, const QuadOptions& opts = {.tol = 2e-2, .points = 1 << 13});
// int |x-y|^{2k-n-l} Psi(y) dy
QuadratureResult psi_convolution(const TreeConfig& cfg, std::span<const double> x, int l, const QuadOptions& opts);

EtaSequences eta_sequences(const TreeConfig& cfg, std::span<const double> A_deltas, double nu_max,
                           const EtaOptions& opts = {});

struct GiraudResult {
  double Z;
  double bound;
  double ratio;
  double error_estimate;
};

// Z(x,y) = int_Omega (mu + |x-z|)^{gamma-n} |z-y|^{beta-n} dz against the three-case bound with C = 1.
GiraudResult giraud_verify(double gamma, double beta, double mu, std::span<const double> x,
                           std::span<const double> y, const Ball& omega, const QuadOptions& opts = {.tol = 2e-2});

enum class LemmaKind { ordre2, trou0, trou, lemBiBj, lem2 };
LemmaKind lemma_kind(const std::string& name);
std::string to_string(LemmaKind kind);

struct ConvolutionParams {
  int i = 1;
  int j = 2;        // lemBiBj
  int l = 0;
  int p = -1;       // lemBiBj: p < 0 selects the first inequality
  std::vector<double> alphas;  // family-law sweep; empty means the configuration as given
  std::vector<double> M;       // trou: one radius factor per sweep point; empty means mu^{-1/2}
  int x_samples = 12;
  std::uint64_t seed = 0;
  // ratios only need to be resolved to within a few percent
  QuadOptions quad{.tol = 1e-1, .seed = 0, .replicates = 8, .points = 1 << 14};
};

struct RatioRow {
  std::string kind;
  std::vector<std::pair<std::string, double>> params;
  double mu_or_alpha;
  double lhs;
  double rhs;
  double ratio;
  double ratio_error = 0.0;  // quadrature error estimate carried into the ratio
};

// One row per sweep point; x-dependent lemmas report the sampled x of largest ratio.
std::vector<RatioRow> convolution_bound_verify(LemmaKind kind, const TreeConfig& cfg, const ConvolutionParams& params);

// Columns kind, params..., mu_or_alpha, lhs, rhs, ratio. Rows must share parameter names.
std::string ratio_csv(std::span<const RatioRow> rows);

}  // namespace polycrit
