#pragma once

#include <stdexcept>
#include <string>

namespace abel {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// min |b1| over the period fell below the normalization tolerance.
struct DegenerateLeadingCoefficient : Error {
    using Error::Error;
};

/// A(t) has constant nonzero sign, so it has no zeros to anchor a solution.
struct NoZeros : Error {
    using Error::Error;
};

/// Slope field requested on (or too close to) the singular line x = 0.
struct DivisionAtZero : Error {
    using Error::Error;
};

/// Adaptive step fell below the representable minimum without meeting a stop.
struct StepSizeUnderflow : Error {
    using Error::Error;
};

/// Step budget exhausted before any stop condition was met.
struct StepCountExceeded : Error {
    using Error::Error;
};

/// Operation needs a zero of a specific kind (saddle vs node vs degenerate).
struct WrongZeroKind : Error {
    using Error::Error;
};

/// Branch left its invariant region instead of reaching the interval end.
struct BranchEscape : Error {
    using Error::Error;
};

/// Adjacent branches disagree with the required one-sided slope at a zero.
struct GluingMismatch : Error {
    using Error::Error;
};

/// Config text is not well formed.  Carries 1-based line/column of the offense.
struct ParseError : Error {
    int line;
    int column;
    ParseError(const std::string& what, int line_, int column_)
        : Error(what + " (line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

/// Config parsed but violates the schema (unknown key, missing field, bad range).
struct SchemaError : Error {
    using Error::Error;
};

}  // namespace abel
