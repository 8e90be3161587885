#ifndef NRTLID_ERRORS_HPP
#define NRTLID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nrtlid {

// Root-bracketing or iterative-solver failure. Carries the bracket and the
// residuals at its ends so callers can log or widen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi,
                   double f_lo, double f_hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi),
        residual_lo(f_lo), residual_hi(f_hi) {}
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}

  double bracket_lo{0.0};
  double bracket_hi{0.0};
  double residual_lo{0.0};
  double residual_hi{0.0};
};

// Non-finite intermediate value, singular system, or similar numerical defect.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration input (bad file, unresolved label, out-of-bounds grid).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nrtlid

#endif
