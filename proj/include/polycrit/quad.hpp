#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "polycrit/geometry.hpp"

namespace polycrit {

struct Ball {
  Point center;
  double radius;
};

// B(c, R) intersected with {x_1 >= c_1}.
struct HalfBall {
  Point center;
  double radius;
};

struct SphereSurface {
  Point center;
  double radius;
};

struct BallMinusBalls {
  Ball outer;
  std::vector<Ball> inner;
};

// B(0, r_max), or its part with x_1 > 0. tail_bound is the caller's bound on the omitted tail.
struct TruncatedSpace {
  int dim;
  double r_max;
  bool half = false;
  double tail_bound = 0.0;
};

struct Singularity {
  Point point;
  double order;
};

class Domain {
 public:
  using Shape = std::variant<Ball, HalfBall, SphereSurface, BallMinusBalls, TruncatedSpace>;

  Domain(Shape shape, std::vector<Singularity> singularities = {});

  const Shape& shape() const { return shape_; }
  const std::vector<Singularity>& singularities() const { return singularities_; }
  int dim() const;
  bool contains(std::span<const double> x) const;
  Ball bounding_ball() const;
  // Volume, or area for a sphere.
  double measure() const;

 private:
  Shape shape_;
  std::vector<Singularity> singularities_;
};

enum class QuadMethod { deterministic_radial, deterministic_axial, qmc };

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  QuadMethod method = QuadMethod::deterministic_radial;
  long samples_used = 0;
};

struct QuadOptions {
  double tol = 1e-10;  // relative
  std::uint64_t seed = 0;
  int replicates = 8;
  int points = 1 << 14;  // per replicate
  bool throw_on_inaccuracy = true;
};

using ScalarField = std::function<double(std::span<const double>)>;
using RadialProfile = std::function<double(double)>;

// Importance hint for sampling: a concentration point of scale `scale`,
// singular like |x - center|^{-order} when order > 0.
struct Peak {
  Point center;
  double scale;
  double order = 0.0;
};

// Sum of pieces; radial pieces are integrated by radial reduction when the domain allows it.
class Integrand {
 public:
  Integrand() = default;
  Integrand(ScalarField f, std::vector<Peak> peaks = {});

  Integrand& add_radial(Point center, RadialProfile g, double sigma = 0.0, double scale = 0.0);
  Integrand& add_general(ScalarField f, std::vector<Peak> peaks = {});

  double operator()(std::span<const double> x) const;

  struct RadialPiece {
    Point center;
    RadialProfile g;
    double sigma;
    double scale;
  };
  struct GeneralPiece {
    ScalarField f;
    std::vector<Peak> peaks;
  };
  const std::vector<RadialPiece>& radial_pieces() const { return radial_; }
  const std::vector<GeneralPiece>& general_pieces() const { return general_; }

 private:
  std::vector<RadialPiece> radial_;
  std::vector<GeneralPiece> general_;
};

// omega_{n-1} int_0^R g(r) r^{n-1} dr; g may blow up like r^{-sigma} at 0.
QuadratureResult integrate_radial(const RadialProfile& g, double R, int n, double sigma = 0.0,
                                  double tol = 1e-12);

QuadratureResult integrate_volume(const Integrand& f, const Domain& domain, const QuadOptions& opts = {});

QuadratureResult integrate_surface(const ScalarField& f, const SphereSurface& sphere,
                                   const QuadOptions& opts = {});

// Fields that are invariant under rotations about the line center + t * direction.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

std::vector<QuadratureResult> integrate_axial_shell(const VectorField& f, int outputs, int n,
                                                    std::span<const double> center,
                                                    std::span<const double> direction, double r_in,
                                                    double r_out, double tol = 1e-12, int panels = 1);

std::vector<QuadratureResult> integrate_axial_sphere(const VectorField& f, int outputs, int n,
                                                     std::span<const double> center,
                                                     std::span<const double> direction,
                                                     double radius, double tol = 1e-13);

// Over the cylinder base + t e + rho p, t in [t0, t1], rho in [0, rho_max], with composite
// Gauss rules on `panels` panels per axis.
std::vector<QuadratureResult> integrate_axial_cylinder(const VectorField& f, int outputs, int n,
                                                       std::span<const double> base,
                                                       std::span<const double> direction, double t0,
                                                       double t1, double rho_max, double tol = 1e-12,
                                                       int panels = 8);

// Fraction of S^{n-1} within angle theta of a pole, given cos(theta).
double sphere_cap_fraction(int n, double cos_theta);
// Fraction of the sphere |x - c| = r lying inside a ball of radius R whose center is at distance d from c.
double sphere_in_ball_fraction(int n, double r, double d, double R);

// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1], N in {8,16,32,64,128,256}.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int N);

// Sobol points in (0,1)^dim with a random digital shift drawn from `seed`.
class ShiftedSobol {
 public:
  ShiftedSobol(int dim, std::uint64_t seed);
  ~ShiftedSobol();
  ShiftedSobol(ShiftedSobol&&) noexcept;
  ShiftedSobol& operator=(ShiftedSobol&&) noexcept;

  int dim() const { return dim_; }
  void next(std::span<double> out);

 private:
  struct Impl;
  int dim_;
  std::unique_ptr<Impl> impl_;
};

// Maps n uniforms to a uniformly distributed unit vector.
void uniforms_to_sphere(std::span<const double> u, std::span<double> out);

}  // namespace polycrit
