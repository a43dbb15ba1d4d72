#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "polycrit/geometry.hpp"
#include "polycrit/taylor.hpp"

namespace polycrit {

// All partial derivatives d^alpha u(x) with |alpha| <= order at one point.
class Jet {
 public:
  Jet(std::shared_ptr<const MultiIndexSet> set, std::vector<double> partials);
  static Jet from_taylor(const Taylor& t);

  int dim() const { return set_->dim(); }
  int order() const { return set_->order(); }
  const MultiIndexSet& set() const { return *set_; }
  std::span<const double> partials() const { return d_; }

  double value() const { return d_[0]; }
  double partial(std::span<const int> alpha) const;
  Point gradient() const;

  // (-Delta)^i u, its gradient and its Hessian (row-major n x n).
  double laplacian_power(int i) const;
  Point grad_laplacian_power(int i) const;
  std::vector<double> hessian_laplacian_power(int i) const;

  // Frobenius norm of the order-l derivative tensor.
  double tensor_norm(int l) const;

  // Max deviation in the identities trace Hess (-Delta)^i u = -(-Delta)^{i+1} u.
  double trace_defect() const;

 private:
  double polylap(int i, std::span<const int> extra) const;
  void require(int order) const;

  std::shared_ptr<const MultiIndexSet> set_;
  std::vector<double> d_;
};

// The series of u(P(x)) given the jet of u at P(x0) and the series P.
Taylor compose(const Jet& outer, std::span<const Taylor> inner);

struct Symmetry {
  enum class Kind { none, radial, axial };
  Kind kind = Kind::none;
  Point point;
  Point direction;
};

class JetProvider {
 public:
  virtual ~JetProvider() = default;
  virtual int dim() const = 0;
  // Highest derivative order the provider can deliver.
  virtual int smoothness() const = 0;
  virtual Jet jet(std::span<const double> x, int order) const = 0;
  virtual double value(std::span<const double> x) const { return jet(x, 0).value(); }
  virtual Symmetry symmetry() const { return {}; }
};

// Provider defined by a formula over Taylor variables; jets come from one expansion.
class TaylorJetProvider : public JetProvider {
 public:
  using Formula = std::function<Taylor(std::span<const Taylor>)>;

  TaylorJetProvider(int n, int smoothness, Formula formula, Symmetry symmetry = {});

  int dim() const override { return n_; }
  int smoothness() const override { return smoothness_; }
  Jet jet(std::span<const double> x, int order) const override;
  Symmetry symmetry() const override { return symmetry_; }

 private:
  int n_;
  int smoothness_;
  Formula formula_;
  Symmetry symmetry_;
};

std::shared_ptr<JetProvider> zero_provider(int n);

}  // namespace polycrit
