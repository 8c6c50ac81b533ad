#pragma once

#include <stdexcept>
#include <string>

namespace dldo {

// Bad input: out-of-range parameter, malformed config, impossible scenario.
// The message names the offending field. CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The math broke down at runtime (non-finite result, bracketing failure).
// CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dldo
