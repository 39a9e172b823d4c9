#ifndef PSDC_COMMON_HPP
#define PSDC_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#define PSDC_VERSION "1.0.0"

namespace psdc {

using Complex = std::complex<double>;

/// Contract violation (bad sizes, unsupported combinations, non-positive data).
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Runtime numerical breakdown (singular systems, diverged iterations).
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace psdc

#endif
