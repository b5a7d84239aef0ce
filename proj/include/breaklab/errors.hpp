#pragma once

#include <stdexcept>
#include <string>

namespace breaklab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid model specification, configuration value or input file.
class SpecError : public Error {
public:
    using Error::Error;
};

/// Sample whose residual variance is zero, so self-normalized statistics are undefined.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// Candidate break index outside the admissible range.
class BreakIndexError : public Error {
public:
    using Error::Error;
};

/// Critical value table does not carry the requested entry.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient design or Gram matrix.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, long column)
        : Error(what), column_(column) {}

    /// Index of the first column found to be linearly dependent (-1 if unknown).
    [[nodiscard]] long column() const noexcept { return column_; }

private:
    long column_;
};

}  // namespace breaklab
