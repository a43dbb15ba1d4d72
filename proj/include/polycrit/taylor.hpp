#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace polycrit {

// All multi-indices alpha in N^n with |alpha| <= L, graded then lexicographic.
class MultiIndexSet {
 public:
  static std::shared_ptr<const MultiIndexSet> get(int n, int order);

  int dim() const { return n_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(degree_.size()); }
  std::span<const std::uint8_t> alpha(int i) const {
    return {exps_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
  }
  int degree(int i) const { return degree_[i]; }
  // First index of degree d; degree_begin(L+1) == size().
  int degree_begin(int d) const { return offsets_[d]; }
  // -1 if alpha is not in the set.
  int index(std::span<const int> alpha) const;
  // Index of alpha(i) + e_v, or -1 when that exceeds the order.
  int raise(int i, int v) const { return raise_[static_cast<std::size_t>(i) * n_ + v]; }
  // alpha! for entry i.
  double factorial(int i) const { return factorial_[i]; }

  struct ProductEntry {
    int j;
    int k;
  };
  // For entry i: all (j, k) with alpha(i) + alpha(j) = alpha(k).
  std::span<const ProductEntry> products(int i) const;

  MultiIndexSet(int n, int order);

 private:
  std::uint64_t key(std::span<const std::uint8_t> a) const;
  int find(std::uint64_t key) const;

  int n_;
  int order_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<int> offsets_;
  std::vector<int> raise_;
  std::vector<double> factorial_;
  std::vector<std::uint64_t> keys_;
  std::vector<int> sorted_;
  void build_products() const;

  mutable std::once_flag products_once_;
  mutable std::vector<ProductEntry> products_;
  mutable std::vector<int> product_begin_;
};

// Truncated multivariate Taylor series sum_alpha c_alpha delta^alpha about a point.
class Taylor {
 public:
  Taylor() = default;
  explicit Taylor(std::shared_ptr<const MultiIndexSet> set, double constant = 0.0);

  // The coordinate x0 + delta_i as a series.
  static Taylor variable(std::shared_ptr<const MultiIndexSet> set, int i, double x0);
  static std::vector<Taylor> variables(std::span<const double> x0, int order);

  const MultiIndexSet& set() const { return *set_; }
  const std::shared_ptr<const MultiIndexSet>& set_ptr() const { return set_; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }
  double value() const { return c_[0]; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  Taylor& operator+=(const Taylor& o);
  Taylor& operator-=(const Taylor& o);
  Taylor& operator*=(const Taylor& o);
  Taylor& operator+=(double s);
  Taylor& operator*=(double s);
  Taylor operator-() const;

  // Partial derivative in variable v; the top degree becomes zero.
  Taylor derivative(int v) const;
  // sum_m g[m] (f - f(x0))^m, where g holds g^{(m)}(f(x0)) / m!.
  Taylor compose(std::span<const double> g) const;

 private:
  std::shared_ptr<const MultiIndexSet> set_;
  std::vector<double> c_;
};

Taylor operator+(Taylor a, const Taylor& b);
Taylor operator-(Taylor a, const Taylor& b);
Taylor operator*(const Taylor& a, const Taylor& b);
Taylor operator+(Taylor a, double s);
Taylor operator+(double s, Taylor a);
Taylor operator-(Taylor a, double s);
Taylor operator-(double s, const Taylor& a);
Taylor operator*(Taylor a, double s);
Taylor operator*(double s, Taylor a);
Taylor operator/(const Taylor& a, const Taylor& b);
Taylor operator/(double s, const Taylor& a);
Taylor operator/(Taylor a, double s);

Taylor exp(const Taylor& a);
Taylor log(const Taylor& a);
Taylor sqrt(const Taylor& a);
Taylor pow(const Taylor& a, double q);
Taylor pow(const Taylor& a, int m);
Taylor reciprocal(const Taylor& a);

}  // namespace polycrit
