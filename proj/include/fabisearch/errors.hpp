#pragma once

#include <stdexcept>
#include <string>

namespace fabisearch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix dimensions do not conform (e.g. X is n x p but W*H is not).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// W*H has a zero entry where the data is strictly positive.
class SingularReconstructionError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

/// Invalid data: non-finite, negative or non-positive where positivity is required, empty.
class DataError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class DegenerateSegmentError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class RescaleError : public Error {
public:
    using Error::Error;
};

/// Simulation specification is invalid (e.g. covariance not positive definite).
class SpecError : public Error {
public:
    using Error::Error;
};

class AtlasMismatchError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based row/column of the offending cell when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long row = -1, long col = -1)
        : Error(what), row_(row), col_(col) {}

    long row() const noexcept { return row_; }
    long col() const noexcept { return col_; }

private:
    long row_;
    long col_;
};

}  // namespace fabisearch
