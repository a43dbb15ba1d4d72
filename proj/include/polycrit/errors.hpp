#pragma once

#include <stdexcept>
#include <string>

namespace polycrit {

// Invalid arguments such as n <= 2k or a negative scale.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A symbolic object cannot be put in the requested form.
struct RepresentationError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SingularPointError : std::domain_error {
  using std::domain_error::domain_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergentIntegralError : std::domain_error {
  using std::domain_error::domain_error;
};

struct AmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical result not within tolerance. Carries the best available value.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double partial, double error)
      : std::runtime_error(what), partial_(partial), error_(error) {}
  double partial_value() const noexcept { return partial_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double partial_;
  double error_;
};

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double radius)
      : std::runtime_error(what), radius_(radius) {}
  double blowup_radius() const noexcept { return radius_; }

 private:
  double radius_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double condition = 0.0)
      : std::runtime_error(what), condition_(condition) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace polycrit
