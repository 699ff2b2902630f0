#pragma once
#include <stdexcept>
#include <string>

namespace scloss {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid parsing or validation failure (carries row/column context in the message).
class GridError : public Error {
public:
    using Error::Error;
};

/// Request for an embedded table that does not exist; message lists valid names.
class UnknownTableError : public Error {
public:
    using Error::Error;
};

/// Every multi-start fit attempt produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// File read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace scloss
