#pragma once

#include <stdexcept>
#include <string>

namespace sme {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or out-of-domain input (t < 0, bad weights, ...).
class domain_error : public error {
 public:
  explicit domain_error(const std::string& msg) : error(msg) {}
};

/// A (trt, marker) cell contains no events; the model is not identifiable.
class non_identifiable_error : public error {
 public:
  non_identifiable_error(const std::string& msg, int trt, int marker)
      : error(msg), trt_(trt), marker_(marker) {}
  int trt() const { return trt_; }
  int marker() const { return marker_; }

 private:
  int trt_;
  int marker_;
};

/// Optimizer did not reach the gradient tolerance within max_iter.
class not_converged_error : public error {
 public:
  explicit not_converged_error(const std::string& msg) : error(msg) {}
};

/// Observed information matrix is singular or not positive definite.
class singular_information_error : public error {
 public:
  explicit singular_information_error(const std::string& msg) : error(msg) {}
};

/// Denominator of a relative-risk expression is zero.
class zero_denominator_error : public error {
 public:
  explicit zero_denominator_error(const std::string& msg) : error(msg) {}
};

/// Correlation matrix is not symmetric / unit-diagonal / PSD.
class invalid_correlation_error : public error {
 public:
  explicit invalid_correlation_error(const std::string& msg) : error(msg) {}
};

/// Root bracketing failed (asserted unreachable for valid inputs).
class bracket_failure_error : public error {
 public:
  explicit bracket_failure_error(const std::string& msg) : error(msg) {}
};

/// Survival underflowed past the representable tail; ratio undefined.
class tail_underflow_error : public error {
 public:
  explicit tail_underflow_error(const std::string& msg) : error(msg) {}
};

/// File / CSV / JSON input problem; message carries the location.
class io_error : public error {
 public:
  explicit io_error(const std::string& msg) : error(msg) {}
};

}  // namespace sme
