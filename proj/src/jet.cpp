#include "polycrit/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polycrit/errors.hpp"

namespace polycrit {

Jet::Jet(std::shared_ptr<const MultiIndexSet> set, std::vector<double> partials)
    : set_(std::move(set)), d_(std::move(partials)) {
  if (static_cast<int>(d_.size()) != set_->size()) throw ParameterError("Jet: table size mismatch");
}

Jet Jet::from_taylor(const Taylor& t) {
  const auto& s = t.set();
  std::vector<double> d(s.size());
  for (int i = 0; i < s.size(); ++i) d[i] = t[i] * s.factorial(i);
  return Jet(t.set_ptr(), std::move(d));
}

void Jet::require(int order) const {
  if (order > set_->order())
    throw ParameterError("Jet: order " + std::to_string(order) + " requested from a jet of order " +
                         std::to_string(set_->order()));
}

double Jet::partial(std::span<const int> alpha) const {
  const int i = set_->index(alpha);
  if (i < 0) throw ParameterError("Jet: multi-index outside the table");
  return d_[i];
}

Point Jet::gradient() const {
  require(1);
  return Point(d_.begin() + 1, d_.begin() + 1 + dim());
}

// (-1)^i sum_{|beta|=i} (i!/beta!) d^{2 beta + extra} u
double Jet::polylap(int i, std::span<const int> extra) const {
  int extra_order = 0;
  for (int e : extra) extra_order += e;
  require(2 * i + extra_order);
  const auto& s = *set_;
  const int n = dim();
  double ifact = 1.0;
  for (int m = 2; m <= i; ++m) ifact *= m;
  std::vector<int> a(n);
  double sum = 0.0;
  for (int b = s.degree_begin(i); b < s.degree_begin(i + 1); ++b) {
    auto beta = s.alpha(b);
    for (int v = 0; v < n; ++v) a[v] = 2 * beta[v] + extra[v];
    sum += ifact / s.factorial(b) * d_[s.index(a)];
  }
  return (i % 2 ? -sum : sum);
}

double Jet::laplacian_power(int i) const {
  std::vector<int> none(dim(), 0);
  return polylap(i, none);
}

Point Jet::grad_laplacian_power(int i) const {
  const int n = dim();
  Point g(n);
  std::vector<int> e(n, 0);
  for (int v = 0; v < n; ++v) {
    e[v] = 1;
    g[v] = polylap(i, e);
    e[v] = 0;
  }
  return g;
}

std::vector<double> Jet::hessian_laplacian_power(int i) const {
  const int n = dim();
  std::vector<double> h(static_cast<std::size_t>(n) * n);
  std::vector<int> e(n, 0);
  for (int v = 0; v < n; ++v)
    for (int w = v; w < n; ++w) {
      e[v] += 1;
      e[w] += 1;
      const double val = polylap(i, e);
      e[v] -= 1;
      e[w] -= 1;
      h[v * n + w] = val;
      h[w * n + v] = val;
    }
  return h;
}

double Jet::tensor_norm(int l) const {
  require(l);
  const auto& s = *set_;
  double lfact = 1.0;
  for (int m = 2; m <= l; ++m) lfact *= m;
  double sum = 0.0;
  for (int b = s.degree_begin(l); b < s.degree_begin(l + 1); ++b)
    sum += lfact / s.factorial(b) * d_[b] * d_[b];
  return std::sqrt(sum);
}

double Jet::trace_defect() const {
  double worst = 0.0;
  const int n = dim();
  for (int i = 0; 2 * i + 2 <= order(); ++i) {
    auto h = hessian_laplacian_power(i);
    double tr = 0.0;
    for (int v = 0; v < n; ++v) tr += h[v * n + v];
    const double next = laplacian_power(i + 1);
    worst = std::max(worst, std::abs(tr + next) / std::max(1.0, std::abs(next)));
  }
  return worst;
}

Taylor compose(const Jet& outer, std::span<const Taylor> inner) {
  const int n = outer.dim();
  if (static_cast<int>(inner.size()) != n) throw ParameterError("compose: dimension mismatch");
  const auto& set = inner[0].set_ptr();
  const int L = std::min(outer.order(), set->order());
  // powers[v][m] = (inner_v - inner_v(x0))^m
  std::vector<std::vector<Taylor>> powers(n);
  for (int v = 0; v < n; ++v) {
    Taylor d = inner[v] - inner[v].value();
    powers[v].push_back(Taylor(set, 1.0));
    for (int m = 1; m <= L; ++m) powers[v].push_back(powers[v].back() * d);
  }
  const auto& os = outer.set();
  Taylor out(set);
  for (int i = 0; i < os.degree_begin(L + 1); ++i) {
    const double c = outer.partials()[i] / os.factorial(i);
    if (c == 0.0) continue;
    auto alpha = os.alpha(i);
    Taylor term(set, c);
    for (int v = 0; v < n; ++v)
      if (alpha[v]) term = term * powers[v][alpha[v]];
    out += term;
  }
  return out;
}

TaylorJetProvider::TaylorJetProvider(int n, int smoothness, Formula formula, Symmetry symmetry)
    : n_(n), smoothness_(smoothness), formula_(std::move(formula)), symmetry_(std::move(symmetry)) {}

Jet TaylorJetProvider::jet(std::span<const double> x, int order) const {
  if (order > smoothness_) throw ParameterError("jet order exceeds declared smoothness");
  if (static_cast<int>(x.size()) != n_) throw ParameterError("jet: point dimension mismatch");
  auto vars = Taylor::variables(x, order);
  return Jet::from_taylor(formula_(vars));
}

std::shared_ptr<JetProvider> zero_provider(int n) {
  Symmetry sym{Symmetry::Kind::radial, Point(n, 0.0), unit_vector(n, 0)};
  return std::make_shared<TaylorJetProvider>(
      n, 64, [](std::span<const Taylor> x) { return Taylor(x[0].set_ptr(), 0.0); }, sym);
}

}  // namespace polycrit
