#include "polycrit/radialgebra.hpp"

#include <cmath>
#include <sstream>

#include "polycrit/errors.hpp"
#include "polycrit/geometry.hpp"

namespace polycrit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

mpq_class parse_rational(const std::string& text) {
  mpq_class q;
  if (q.set_str(text, 10) != 0) throw RepresentationError("bad rational '" + text + "'");
  q.canonicalize();
  return q;
}

}  // namespace

LaurentPoly::LaurentPoly(const mpq_class& c, int exponent) {
  if (c != 0) terms_[exponent] = c;
}

mpq_class LaurentPoly::coefficient(int exponent) const {
  auto it = terms_.find(exponent);
  return it == terms_.end() ? mpq_class(0) : it->second;
}

void LaurentPoly::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) it = it->second == 0 ? terms_.erase(it) : ++it;
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] += c;
  prune();
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& o) {
  for (const auto& [e, c] : o.terms_) terms_[e] -= c;
  prune();
  return *this;
}

LaurentPoly& LaurentPoly::operator*=(const LaurentPoly& o) {
  std::map<int, mpq_class> r;
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) r[e1 + e2] += c1 * c2;
  terms_ = std::move(r);
  prune();
  return *this;
}

LaurentPoly& LaurentPoly::operator*=(const mpq_class& s) {
  for (auto& [e, c] : terms_) c *= s;
  prune();
  return *this;
}

LaurentPoly LaurentPoly::shifted(int by) const {
  LaurentPoly r;
  for (const auto& [e, c] : terms_) r.terms_[e + by] = c;
  return r;
}

double LaurentPoly::eval(double a) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c.get_d() * std::pow(a, e);
  return s;
}

long double LaurentPoly::eval_long(long double a) const {
  long double s = 0.0L;
  for (const auto& [e, c] : terms_) {
    const long double cv =
        static_cast<long double>(mpz_class(c.get_num()).get_d()) / mpz_class(c.get_den()).get_d();
    s += cv * std::pow(a, static_cast<long double>(e));
  }
  return s;
}

LaurentPoly LaurentPoly::reduce_power(int k, const mpq_class& value) const {
  LaurentPoly r;
  for (const auto& [e, c] : terms_) {
    int q = e / k, rem = e % k;
    if (rem < 0) {
      rem += k;
      --q;
    }
    mpq_class factor = 1;
    mpq_class base = q >= 0 ? value : mpq_class(1) / value;
    for (int i = 0; i < std::abs(q); ++i) factor *= base;
    r.terms_[rem] += c * factor;
  }
  r.prune();
  return r;
}

std::string LaurentPoly::to_string() const {
  if (terms_.empty()) return "0/1";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.get_num().get_str() << '/' << c.get_den().get_str();
    if (e == 1)
      os << "*a";
    else if (e != 0)
      os << "*a^" << e;
  }
  return os.str();
}

LaurentPoly LaurentPoly::parse(const std::string& text) {
  LaurentPoly r;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, '+')) {
    piece = trim(piece);
    if (piece.empty()) throw RepresentationError("empty monomial in '" + text + "'");
    int e = 0;
    std::string coeff = piece;
    if (auto star = piece.find('*'); star != std::string::npos) {
      coeff = trim(piece.substr(0, star));
      std::string sym = trim(piece.substr(star + 1));
      if (sym == "a")
        e = 1;
      else if (sym.rfind("a^", 0) == 0)
        e = std::stoi(sym.substr(2));
      else
        throw RepresentationError("bad monomial '" + piece + "'");
    }
    r.terms_[e] += parse_rational(coeff);
  }
  r.prune();
  return r;
}

LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
LaurentPoly operator*(LaurentPoly a, const LaurentPoly& b) { return a *= b; }

RadialFunction::RadialFunction(int n, int M) : n_(n), M_(M) {
  if (n < 1) throw ParameterError("RadialFunction: dimension must be positive");
}

std::vector<RadialTerm> RadialFunction::term_list() const {
  std::vector<RadialTerm> out;
  for (const auto& [key, c] : terms_) out.push_back({c, key.first, key.second});
  return out;
}

void RadialFunction::add_term(const LaurentPoly& coeff, int p, int t) {
  if (p < 0) throw RepresentationError("negative power of r");
  auto& slot = terms_[{p, t}];
  slot += coeff;
  if (slot.is_zero()) terms_.erase({p, t});
}

double RadialFunction::eval(double r, double a) const {
  const double h = 1.0 + a * r * r;
  double s = 0.0;
  for (const auto& [key, c] : terms_)
    s += c.eval(a) * std::pow(r, key.first) * std::pow(h, -0.5 * (M_ + 2 * key.second));
  return s;
}

long double RadialFunction::eval_long(long double r, long double a) const {
  const long double h = 1.0L + a * r * r;
  long double s = 0.0L;
  for (const auto& [key, c] : terms_)
    s += c.eval_long(a) * std::pow(r, static_cast<long double>(key.first)) *
         std::pow(h, -0.5L * (M_ + 2 * key.second));
  return s;
}

double RadialFunction::integrate(double a) const {
  double total = 0.0;
  for (const auto& [key, c] : terms_) {
    const double x = 0.5 * (key.first + n_);
    const double y = 0.5 * (M_ + 2 * key.second) - x;
    if (y <= 0.0) throw DivergentIntegralError("radial integral diverges at infinity");
    const double beta = std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
    total += c.eval(a) * 0.5 * std::pow(a, -x) * beta;
  }
  return sphere_area(n_) * total;
}

std::string RadialFunction::serialize() const {
  std::ostringstream os;
  os << "n=" << n_ << " M=" << M_ << '\n';
  for (const auto& [key, c] : terms_) os << c.to_string() << " ; " << key.first << " ; " << key.second << '\n';
  return os.str();
}

RadialFunction RadialFunction::parse(const std::string& text) {
  std::istringstream is(text);
  std::string header;
  if (!std::getline(is, header)) throw RepresentationError("missing header line");
  int n = 0, M = 0;
  if (std::sscanf(header.c_str(), "n=%d M=%d", &n, &M) != 2) throw RepresentationError("bad header '" + header + "'");
  RadialFunction f(n, M);
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto s1 = line.find(';');
    const auto s2 = line.find(';', s1 + 1);
    if (s1 == std::string::npos || s2 == std::string::npos) throw RepresentationError("bad term line '" + line + "'");
    f.add_term(LaurentPoly::parse(line.substr(0, s1)), std::stoi(line.substr(s1 + 1, s2 - s1 - 1)),
               std::stoi(line.substr(s2 + 1)));
  }
  return f;
}

RadialFunction& RadialFunction::operator+=(const RadialFunction& o) {
  if (o.n_ != n_ || o.M_ != M_) throw RepresentationError("adding radial functions with different n or M");
  for (const auto& [key, c] : o.terms_) add_term(c, key.first, key.second);
  return *this;
}

RadialFunction& RadialFunction::operator*=(const mpq_class& s) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second.is_zero() ? terms_.erase(it) : ++it;
  }
  return *this;
}

RadialFunction operator+(RadialFunction a, const RadialFunction& b) { return a += b; }

RadialFunction operator-(RadialFunction a, const RadialFunction& b) {
  return a += b * mpq_class(-1);
}

RadialFunction operator*(const RadialFunction& a, const RadialFunction& b) {
  if (a.dim() != b.dim()) throw RepresentationError("multiplying radial functions in different dimensions");
  RadialFunction r(a.dim(), a.doubled_base() + b.doubled_base());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) r.add_term(ca * cb, ka.first + kb.first, ka.second + kb.second);
  return r;
}

RadialFunction operator*(RadialFunction a, const mpq_class& s) { return a *= s; }

RadialFunction make_bubble(int n, int k) {
  if (k < 1 || n <= 2 * k) throw ParameterError("make_bubble requires k >= 1 and n > 2k");
  RadialFunction f(n, n - 2 * k);
  f.add_term(LaurentPoly(1), 0, 0);
  return f;
}

RadialFunction constant_one(int n) {
  RadialFunction f(n, 0);
  f.add_term(LaurentPoly(1), 0, 0);
  return f;
}

// Delta(r^p h^{-S/2}) = p(p+n-2) r^{p-2} h^{-S/2} - a S(2p+n) r^p h^{-S/2-1} + a^2 S(S+2) r^{p+2} h^{-S/2-2}
RadialFunction minus_laplacian(const RadialFunction& f) {
  const int n = f.dim();
  RadialFunction r(n, f.doubled_base());
  for (const auto& [key, c] : f.terms()) {
    const auto [p, t] = key;
    const long S = f.doubled_base() + 2L * t;
    const long c0 = static_cast<long>(p) * (p + n - 2);
    if (c0 != 0) {
      if (p < 2) throw RepresentationError("Laplacian produces a negative power of r");
      r.add_term(c * LaurentPoly(mpq_class(-c0)), p - 2, t);
    }
    r.add_term(c.shifted(1) * LaurentPoly(mpq_class(S * (2L * p + n))), p, t + 1);
    r.add_term(c.shifted(2) * LaurentPoly(mpq_class(-S * (S + 2))), p + 2, t + 2);
  }
  return r;
}

// d/dr (r^p h^{-S/2}) = p r^{p-1} h^{-S/2} - a S r^{p+1} h^{-S/2-1}
RadialFunction radial_derivative(const RadialFunction& f) {
  RadialFunction r(f.dim(), f.doubled_base());
  for (const auto& [key, c] : f.terms()) {
    const auto [p, t] = key;
    const long S = f.doubled_base() + 2L * t;
    if (p > 0) r.add_term(c * LaurentPoly(mpq_class(p)), p - 1, t);
    r.add_term(c.shifted(1) * LaurentPoly(mpq_class(-S)), p + 1, t + 1);
  }
  return r;
}

RadialFunction divide_by_r(const RadialFunction& f) {
  RadialFunction r(f.dim(), f.doubled_base());
  for (const auto& [key, c] : f.terms()) {
    if (key.first < 1) throw RepresentationError("division by r of a term with p = 0");
    r.add_term(c, key.first - 1, key.second);
  }
  return r;
}

// r^2 h^{-s} = a^{-1} (h^{-(s-1)} - h^{-s})
RadialFunction power_reduce(const RadialFunction& f) {
  std::map<std::pair<int, int>, LaurentPoly> work = f.terms();
  for (const auto& [key, c] : work)
    if (key.first % 2 != 0) throw RepresentationError("power_reduce: odd power of r present");
  RadialFunction r(f.dim(), f.doubled_base());
  while (!work.empty()) {
    // keys are ordered by p first, so the last entry has the largest power
    auto it = std::prev(work.end());
    const auto [p, t] = it->first;
    const LaurentPoly c = it->second;
    work.erase(it);
    if (p == 0) {
      r.add_term(c, 0, t);
      continue;
    }
    const LaurentPoly down = c.shifted(-1);
    auto add = [&](const LaurentPoly& v, int pp, int tt) {
      auto& slot = work[{pp, tt}];
      slot += v;
      if (slot.is_zero()) work.erase({pp, tt});
    };
    add(down, p - 2, t - 1);
    add(down * LaurentPoly(mpq_class(-1)), p - 2, t);
  }
  return r;
}

mpz_class bubble_product(int n, int k) {
  mpz_class prod = 1;
  for (int l = -k; l <= k - 1; ++l) prod *= (n + 2 * l);
  return prod;
}

double bubble_constant(int n, int k) {
  if (k < 1 || n <= 2 * k) throw ParameterError("bubble_constant requires k >= 1 and n > 2k");
  return std::pow(bubble_product(n, k).get_d(), -1.0 / k);
}

long double bubble_constant_long(int n, int k) {
  if (k < 1 || n <= 2 * k) throw ParameterError("bubble_constant requires k >= 1 and n > 2k");
  return std::pow(static_cast<long double>(bubble_product(n, k).get_d()), -1.0L / k);
}

ExactCheckResult check_bubble_identity(int n, int k) {
  RadialFunction f = make_bubble(n, k);
  for (int i = 0; i < k; ++i) f = minus_laplacian(f);
  f = power_reduce(f);
  ExactCheckResult out;
  const int target_t = 2 * k;
  for (const auto& [key, c] : f.terms()) {
    if (key.first == 0 && key.second == target_t)
      out.leading_coefficient = c;
    else
      out.residual_terms.push_back({c, key.first, key.second});
  }
  out.reduced_coefficient =
      out.leading_coefficient.reduce_power(k, mpq_class(1) / mpq_class(bubble_product(n, k)));
  out.passed = out.residual_terms.empty() && out.reduced_coefficient == LaurentPoly(1);
  return out;
}

}  // namespace polycrit
