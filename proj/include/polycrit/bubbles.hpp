#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "polycrit/geometry.hpp"
#include "polycrit/jet.hpp"
#include "polycrit/quad.hpp"

namespace polycrit {

enum class BubbleKind { interior, boundary };

// A scaled, translated profile. A null profile means the standard bubble
// (1 + a_{n,k} |y|^2)^{-(n-2k)/2}.
struct BubbleSpec {
  BubbleKind kind = BubbleKind::interior;
  int n = 3;
  int k = 1;
  Point center;
  double mu = 1.0;
  std::shared_ptr<const JetProvider> profile;

  void validate() const;
  bool standard() const { return profile == nullptr; }
};

std::string to_json(const BubbleSpec& spec);
// External profiles cannot be restored from text; they parse as a ParameterError.
BubbleSpec bubble_from_json(const std::string& text);

// (1 + a r^2)^{-(n-2k)/2}
double standard_bubble(int n, int k, double r);

// mu + |x - x_alpha|
double theta(const BubbleSpec& spec, std::span<const double> x);
// (mu / (mu^2 + a |x - x_alpha|^2))^{(n-2k)/2}
double positive_bubble(const BubbleSpec& spec, std::span<const double> x);
// Index 0 is the constant 1; index i >= 1 is bubbles[i - 1].
double positive_bubble(std::span<const BubbleSpec> bubbles, int index, std::span<const double> x);

// Radial cutoff: 1 for r <= 1/2, 0 for r >= 1, smooth monotone in between.
double cutoff(double r);
// The cutoff applied to the series |z|^2.
Taylor cutoff(const Taylor& z2);

// Geodesic normal chart of a ball at a boundary point: z_1 is the depth, z' the
// boundary coordinates scaled to arc length. Maps z_1 > 0 into the ball.
class BoundaryChart {
 public:
  BoundaryChart(const Ball& omega, std::span<const double> boundary_point);

  Point to_ball(std::span<const double> z) const;
  Point to_chart(std::span<const double> x) const;
  const Point& normal() const { return nu_; }

 private:
  Ball omega_;
  Point nu_;
  std::vector<Point> tangents_;
};

// The cutoff-localized bubble. Omega must be a ball; boundary bubbles need radius >= 1.
double eval_V(const BubbleSpec& spec, std::span<const double> x, const Domain& omega);

// All partials of V up to `order` (<= 2k) at x; interior bubbles only.
Jet bubble_jet(const BubbleSpec& spec, std::span<const double> x, int order, const Domain& omega);

struct DecayReport {
  int l;
  double slope;
  double expected;
  double deviation;
};

// Log-log slope of |grad^l B| along a ray through the given radii.
DecayReport check_decay(int n, int k, int l, std::span<const double> radii);

// Z_0 = (n-2k)/2 B + x . grad B, then Z_i = d_i B.
std::vector<std::shared_ptr<JetProvider>> kernel_elements(int n, int k);

// Constant symmetric (2p,0)-tensors: lambda (.,.) or the p-fold power of diag(a_1..a_n).
struct LowerOrderTensor {
  enum class Kind { isotropic, diagonal };
  Kind kind = Kind::isotropic;
  double lambda = 0.0;
  std::vector<double> diag;

  static LowerOrderTensor isotropic(double lambda) { return {Kind::isotropic, lambda, {}}; }
  static LowerOrderTensor diagonal(std::vector<double> a) { return {Kind::diagonal, 0.0, std::move(a)}; }
};

// int A(grad^p B_mu, grad^p B_mu) over R^n, or over the half-space with B restricted.
double compute_IA(const LowerOrderTensor& A, int n, int k, int p, bool half_space, double mu = 1.0);

enum class SignVerdict { positive, negative, violated };

struct SignReport {
  SignVerdict verdict;
  std::vector<double> values;  // full space then half-space, per tensor
  int witness = -1;            // offending entry of values when violated
};

SignReport check_sign_condition(std::span<const LowerOrderTensor> samples, int n, int k, int p);

}  // namespace polycrit
