#pragma once

#include <stdexcept>
#include <string>

namespace fcomp {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input: unknown variable names, non-stochastic rows, bad
// parameters, unparsable files.  CLI exit code 1.
struct InvalidInput : Error {
    using Error::Error;
};

// A mathematical or resource precondition does not hold: function not
// invertible, channel not degraded, enumeration guard exceeded, ...
// CLI exit code 2.
struct PreconditionError : Error {
    using Error::Error;
};

// An internal identity failed, e.g. an information quantity came out
// below -tol_num.  Indicates a formula or numerics bug.  CLI exit code 3.
struct ConsistencyError : Error {
    using Error::Error;
};

} // namespace fcomp
