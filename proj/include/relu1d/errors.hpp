#pragma once

#include <stdexcept>
#include <string>

namespace relu1d {

// Every failure the library can raise, so callers (and the CLI exit-code
// mapping) can dispatch on the reason without parsing message text.
enum class ErrorKind {
  invalid_value,        // non-finite or out-of-range scalar input
  shape_error,          // mismatched array lengths / empty input lists
  invalid_interval,     // interval with lo >= hi or non-finite finite-only endpoint
  invariant_error,      // representation invariant violated (e.g. non-canonical form)
  invalid_sigma,        // bias scale must be strictly positive
  index_error,          // layer/neuron index out of range
  invalid_layer,        // layer index below 1
  invalid_variance,     // nonpositive variance fed to a kernel
  invalid_correlation,  // |rho| > 1 beyond numerical tolerance
  invalid_tolerance,    // nonpositive approximation tolerance
  insufficient_samples, // fewer than two grid samples
  invalid_complexity,   // nonpositive piece count
  domain_error,         // sample grid inconsistent with declared domain
  config_mismatch,      // experiment results not mergeable
  first_layer_affine,   // crossing experiment pointed at the affine first layer
  nothing_to_propagate, // survival experiment needs at least two hidden layers
  io_error,             // file could not be read or written
  internal_error,       // "cannot happen" guard tripped
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_value: return "invalid_value";
    case ErrorKind::shape_error: return "shape_error";
    case ErrorKind::invalid_interval: return "invalid_interval";
    case ErrorKind::invariant_error: return "invariant_error";
    case ErrorKind::invalid_sigma: return "invalid_sigma";
    case ErrorKind::index_error: return "index_error";
    case ErrorKind::invalid_layer: return "invalid_layer";
    case ErrorKind::invalid_variance: return "invalid_variance";
    case ErrorKind::invalid_correlation: return "invalid_correlation";
    case ErrorKind::invalid_tolerance: return "invalid_tolerance";
    case ErrorKind::insufficient_samples: return "insufficient_samples";
    case ErrorKind::invalid_complexity: return "invalid_complexity";
    case ErrorKind::domain_error: return "domain_error";
    case ErrorKind::config_mismatch: return "config_mismatch";
    case ErrorKind::first_layer_affine: return "first_layer_affine";
    case ErrorKind::nothing_to_propagate: return "nothing_to_propagate";
    case ErrorKind::io_error: return "io_error";
    case ErrorKind::internal_error: return "internal_error";
  }
  return "unknown_error";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace relu1d
