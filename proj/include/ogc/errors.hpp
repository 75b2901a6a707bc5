#pragma once

#include <stdexcept>
#include <string>

namespace ogc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not fit together.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Graph ingestion failure, e.g. node id outside [0, n).
class IngestionError : public Error {
public:
    using Error::Error;
};

/// Train/val/test split is overlapping or out of range.
class SplitError : public Error {
public:
    using Error::Error;
};

/// Weight matrix with zero Frobenius norm handed to spectral bounding.
class DegenerateWeightError : public Error {
public:
    using Error::Error;
};

/// Metric input that admits no meaningful value (e.g. all-zero rows).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Matrix expected to be positive semi-definite has a negative eigenvalue.
class NotPsdError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergedError : public Error {
public:
    DivergedError(int epoch)
        : Error("training diverged: non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace ogc
