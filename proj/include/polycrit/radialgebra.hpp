#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace polycrit {

// Laurent polynomial in the formal symbol a with exact rational coefficients.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  LaurentPoly(const mpq_class& c, int exponent = 0);

  const std::map<int, mpq_class>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  mpq_class coefficient(int exponent) const;

  LaurentPoly& operator+=(const LaurentPoly& o);
  LaurentPoly& operator-=(const LaurentPoly& o);
  LaurentPoly& operator*=(const LaurentPoly& o);
  LaurentPoly& operator*=(const mpq_class& s);
  LaurentPoly shifted(int by) const;

  double eval(double a) const;
  long double eval_long(long double a) const;

  // Reduce modulo a^k = value, leaving exponents in [0, k).
  LaurentPoly reduce_power(int k, const mpq_class& value) const;

  std::string to_string() const;
  static LaurentPoly parse(const std::string& text);

  friend bool operator==(const LaurentPoly&, const LaurentPoly&) = default;

 private:
  void prune();
  std::map<int, mpq_class> terms_;
};

LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b);
LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b);
LaurentPoly operator*(LaurentPoly a, const LaurentPoly& b);

struct RadialTerm {
  LaurentPoly coeff;
  int p;
  int t;
};

// sum_j c_j(a) r^{p_j} (1 + a r^2)^{-(M + 2 t_j)/2} on R^n. M is the doubled base exponent.
class RadialFunction {
 public:
  RadialFunction(int n, int M);

  int dim() const { return n_; }
  int doubled_base() const { return M_; }
  const std::map<std::pair<int, int>, LaurentPoly>& terms() const { return terms_; }
  std::vector<RadialTerm> term_list() const;
  bool is_zero() const { return terms_.empty(); }

  void add_term(const LaurentPoly& coeff, int p, int t);

  double eval(double r, double a) const;
  long double eval_long(long double r, long double a) const;

  // omega_{n-1} int_0^inf f(r) r^{n-1} dr in closed form (Beta integrals).
  double integrate(double a) const;

  std::string serialize() const;
  static RadialFunction parse(const std::string& text);

  RadialFunction& operator+=(const RadialFunction& o);
  RadialFunction& operator*=(const mpq_class& s);

  friend bool operator==(const RadialFunction&, const RadialFunction&) = default;

 private:
  int n_;
  int M_;
  std::map<std::pair<int, int>, LaurentPoly> terms_;
};

RadialFunction operator+(RadialFunction a, const RadialFunction& b);
RadialFunction operator-(RadialFunction a, const RadialFunction& b);
RadialFunction operator*(const RadialFunction& a, const RadialFunction& b);
RadialFunction operator*(RadialFunction a, const mpq_class& s);

// (1 + a r^2)^{-(n-2k)/2}
RadialFunction make_bubble(int n, int k);
// A RadialFunction for the constant 1 (M = 0).
RadialFunction constant_one(int n);

RadialFunction minus_laplacian(const RadialFunction& f);
RadialFunction radial_derivative(const RadialFunction& f);
// f / r; every term must carry p >= 1.
RadialFunction divide_by_r(const RadialFunction& f);
RadialFunction power_reduce(const RadialFunction& f);

// prod_{l=-k}^{k-1} (n + 2l)
mpz_class bubble_product(int n, int k);
// a_{n,k} = bubble_product^{-1/k}
double bubble_constant(int n, int k);
long double bubble_constant_long(int n, int k);

struct ExactCheckResult {
  bool passed = false;
  LaurentPoly leading_coefficient;
  LaurentPoly reduced_coefficient;
  std::vector<RadialTerm> residual_terms;
};

ExactCheckResult check_bubble_identity(int n, int k);

}  // namespace polycrit
