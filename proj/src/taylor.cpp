#include "polycrit/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "polycrit/errors.hpp"

namespace polycrit {

namespace {

void enumerate(int n, int degree, int var, std::vector<std::uint8_t>& cur,
               std::vector<std::uint8_t>& out) {
  if (var == n - 1) {
    cur[var] = static_cast<std::uint8_t>(degree);
    out.insert(out.end(), cur.begin(), cur.end());
    cur[var] = 0;
    return;
  }
  for (int a = degree; a >= 0; --a) {
    cur[var] = static_cast<std::uint8_t>(a);
    enumerate(n, degree - a, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::shared_ptr<const MultiIndexSet> MultiIndexSet::get(int n, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MultiIndexSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, order}];
  if (!slot) slot = std::make_shared<const MultiIndexSet>(n, order);
  return slot;
}

MultiIndexSet::MultiIndexSet(int n, int order) : n_(n), order_(order) {
  if (n < 1 || order < 0 || order > 40) throw ParameterError("MultiIndexSet: bad dimension or order");
  std::vector<std::uint8_t> cur(n, 0);
  for (int d = 0; d <= order; ++d) {
    offsets_.push_back(static_cast<int>(exps_.size() / n));
    enumerate(n, d, 0, cur, exps_);
  }
  const int count = static_cast<int>(exps_.size() / n);
  offsets_.push_back(count);
  degree_.resize(count);
  factorial_.resize(count);
  keys_.resize(count);
  for (int i = 0; i < count; ++i) {
    auto a = alpha(i);
    int d = 0;
    double f = 1.0;
    for (auto e : a) {
      d += e;
      for (int m = 2; m <= e; ++m) f *= m;
    }
    degree_[i] = d;
    factorial_[i] = f;
    keys_[i] = key(a);
  }
  sorted_.resize(count);
  std::iota(sorted_.begin(), sorted_.end(), 0);
  std::sort(sorted_.begin(), sorted_.end(), [&](int x, int y) { return keys_[x] < keys_[y]; });

  raise_.assign(static_cast<std::size_t>(count) * n, -1);
  std::uint64_t base = 1;
  for (int v = 0; v < n; ++v) {
    for (int i = 0; i < count; ++i)
      if (degree_[i] < order_) raise_[static_cast<std::size_t>(i) * n + v] = find(keys_[i] + base);
    base *= static_cast<std::uint64_t>(order_ + 1);
  }
}

std::uint64_t MultiIndexSet::key(std::span<const std::uint8_t> a) const {
  std::uint64_t k = 0, base = 1;
  for (auto e : a) {
    k += e * base;
    base *= static_cast<std::uint64_t>(order_ + 1);
  }
  return k;
}

int MultiIndexSet::find(std::uint64_t k) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), k,
                             [&](int i, std::uint64_t v) { return keys_[i] < v; });
  if (it == sorted_.end() || keys_[*it] != k) return -1;
  return *it;
}

int MultiIndexSet::index(std::span<const int> a) const {
  if (static_cast<int>(a.size()) != n_) return -1;
  int d = 0;
  std::uint64_t k = 0, base = 1;
  for (int e : a) {
    if (e < 0) return -1;
    d += e;
    k += static_cast<std::uint64_t>(e) * base;
    base *= static_cast<std::uint64_t>(order_ + 1);
  }
  if (d > order_) return -1;
  return find(k);
}

void MultiIndexSet::build_products() const {
  const int count = size();
  product_begin_.reserve(count + 1);
  for (int a = 0; a < count; ++a) {
    product_begin_.push_back(static_cast<int>(products_.size()));
    const int room = order_ - degree_[a];
    for (int b = 0; b < offsets_[room + 1]; ++b) products_.push_back({b, find(keys_[a] + keys_[b])});
  }
  product_begin_.push_back(static_cast<int>(products_.size()));
}

std::span<const MultiIndexSet::ProductEntry> MultiIndexSet::products(int i) const {
  std::call_once(products_once_, [this] { build_products(); });
  return {products_.data() + product_begin_[i],
          static_cast<std::size_t>(product_begin_[i + 1] - product_begin_[i])};
}

Taylor::Taylor(std::shared_ptr<const MultiIndexSet> set, double constant)
    : set_(std::move(set)), c_(set_->size(), 0.0) {
  c_[0] = constant;
}

Taylor Taylor::variable(std::shared_ptr<const MultiIndexSet> set, int i, double x0) {
  Taylor t(std::move(set), x0);
  if (t.set().order() >= 1) t.c_[1 + i] = 1.0;
  return t;
}

std::vector<Taylor> Taylor::variables(std::span<const double> x0, int order) {
  auto set = MultiIndexSet::get(static_cast<int>(x0.size()), order);
  std::vector<Taylor> v;
  v.reserve(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) v.push_back(variable(set, static_cast<int>(i), x0[i]));
  return v;
}

Taylor& Taylor::operator+=(const Taylor& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Taylor& Taylor::operator-=(const Taylor& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Taylor& Taylor::operator*=(const Taylor& o) {
  *this = *this * o;
  return *this;
}

Taylor& Taylor::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Taylor& Taylor::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Taylor Taylor::operator-() const {
  Taylor r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Taylor Taylor::derivative(int v) const {
  Taylor r(set_);
  const auto& s = *set_;
  for (int i = 0; i < s.size(); ++i) {
    const int up = s.raise(i, v);
    if (up >= 0) r.c_[i] = c_[up] * s.alpha(up)[v];
  }
  return r;
}

Taylor Taylor::compose(std::span<const double> g) const {
  Taylor h = *this;
  h.c_[0] = 0.0;
  const int top = std::min<int>(set_->order(), static_cast<int>(g.size()) - 1);
  Taylor r(set_, g[top]);
  for (int m = top - 1; m >= 0; --m) {
    r = r * h;
    r.c_[0] += g[m];
  }
  return r;
}

Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }

Taylor operator*(const Taylor& a, const Taylor& b) {
  Taylor r(a.set_ptr());
  auto rc = r.coeffs();
  auto ac = a.coeffs();
  auto bc = b.coeffs();
  const auto& s = a.set();
  for (int i = 0; i < s.size(); ++i) {
    const double ai = ac[i];
    if (ai == 0.0) continue;
    for (const auto& e : s.products(i)) rc[e.k] += ai * bc[e.j];
  }
  return r;
}

Taylor operator+(Taylor a, double s) { return a += s; }
Taylor operator+(double s, Taylor a) { return a += s; }
Taylor operator-(Taylor a, double s) { return a += -s; }
Taylor operator-(double s, const Taylor& a) { return -a + s; }
Taylor operator*(Taylor a, double s) { return a *= s; }
Taylor operator*(double s, Taylor a) { return a *= s; }
Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
Taylor operator/(double s, const Taylor& a) { return reciprocal(a) * s; }
Taylor operator/(Taylor a, double s) { return a *= 1.0 / s; }

Taylor reciprocal(const Taylor& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw SingularPointError("Taylor reciprocal of a series vanishing at the base point");
  const int L = a.set().order();
  std::vector<double> g(L + 1);
  double p = 1.0 / a0;
  for (int m = 0; m <= L; ++m) {
    g[m] = p;
    p *= -1.0 / a0;
  }
  return a.compose(g);
}

Taylor exp(const Taylor& a) {
  const int L = a.set().order();
  std::vector<double> g(L + 1);
  double p = std::exp(a.value());
  for (int m = 0; m <= L; ++m) {
    g[m] = p;
    p /= (m + 1);
  }
  return a.compose(g);
}

Taylor log(const Taylor& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw SingularPointError("Taylor log of a nonpositive value");
  const int L = a.set().order();
  std::vector<double> g(L + 1);
  g[0] = std::log(a0);
  double p = 1.0;
  for (int m = 1; m <= L; ++m) {
    p /= a0;
    g[m] = (m % 2 ? 1.0 : -1.0) * p / m;
  }
  return a.compose(g);
}

Taylor pow(const Taylor& a, double q) {
  const double a0 = a.value();
  if (a0 <= 0.0) {
    if (q == std::floor(q) && std::abs(q) < 64) return pow(a, static_cast<int>(q));
    throw SingularPointError("Taylor pow of a nonpositive value");
  }
  const int L = a.set().order();
  std::vector<double> g(L + 1);
  double binom = 1.0;
  for (int m = 0; m <= L; ++m) {
    g[m] = binom * std::pow(a0, q - m);
    binom *= (q - m) / (m + 1);
  }
  return a.compose(g);
}

Taylor pow(const Taylor& a, int m) {
  if (m < 0) return reciprocal(pow(a, -m));
  Taylor r(a.set_ptr(), 1.0);
  Taylor b = a;
  while (m > 0) {
    if (m & 1) r = r * b;
    m >>= 1;
    if (m) b = b * b;
  }
  return r;
}

Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

}  // namespace polycrit
