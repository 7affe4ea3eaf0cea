#pragma once

#include <stdexcept>
#include <string>

namespace covdiff {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values, shape mismatches, out-of-range parameters.
struct ValidationError : Error {
    using Error::Error;
};

// Non-finite input, malformed files, non-numeric cells.
struct InputError : Error {
    using Error::Error;
};

// A variance denominator is zero or negative for a named pair of variables.
struct DegeneracyError : Error {
    DegeneracyError(int k, int l, const std::string& what_arg)
        : Error(what_arg), k(k), l(l) {}
    int k, l;  // 0-based variable indices
};

// A matrix required to be PSD has an eigenvalue below -tol.
struct NotPsdError : Error {
    NotPsdError(double eigenvalue, const std::string& what_arg)
        : Error(what_arg), eigenvalue(eigenvalue) {}
    double eigenvalue;
};

}  // namespace covdiff
