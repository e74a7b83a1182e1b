#pragma once

#include <stdexcept>
#include <string>

namespace sfft {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested sparsity exceeds the bandwidth or is otherwise unusable.
class InvalidSparsity : public Error {
public:
    using Error::Error;
};

/// A grid or transform length of zero, or a malformed bandwidth.
class InvalidLength : public Error {
public:
    using Error::Error;
};

/// Ratio taken against a spectral bin that is exactly zero.
class DegenerateBin : public Error {
public:
    using Error::Error;
};

/// The brute-force transform was asked for a length it refuses to handle.
class OracleSize : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

} // namespace sfft
