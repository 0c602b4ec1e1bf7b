#pragma once

#include <stdexcept>
#include <string>

namespace dropshape {

/// Bad input: out-of-domain arguments, invalid shapes, malformed files.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or produced a non-finite value.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dropshape
