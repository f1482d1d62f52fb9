#pragma once

#include <stdexcept>
#include <string>

namespace latgas {

/// Bad inputs: malformed config, out-of-range parameters, shape mismatches.
/// The CLI maps this to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to converge or produced inadmissible values; the message
/// carries the diagnostics (iteration counts, residuals, offending values).
/// The CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latgas
