#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varcond {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Errors raised while reading expression text or a problem file.
/// `offset` is a byte offset into the input where the problem was detected.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset = 0)
        : Error(message), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownIdentifier : public ParseError {
public:
    using ParseError::ParseError;
};

class OrderExceeded : public ParseError {
public:
    using ParseError::ParseError;
};

class MissingSection : public ParseError {
public:
    using ParseError::ParseError;
};

class MissingKey : public ParseError {
public:
    using ParseError::ParseError;
};

class BadBounds : public ParseError {
public:
    using ParseError::ParseError;
};

/// Errors raised by numeric evaluation and the numeric kernels.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Division by zero, log of a nonpositive value, sqrt of a negative value.
class DomainError : public NumericError {
public:
    using NumericError::NumericError;
};

/// A jet coordinate required during evaluation had no binding.
class UnboundCoordinate : public NumericError {
public:
    using NumericError::NumericError;
};

class TooManyNodes : public NumericError {
public:
    using NumericError::NumericError;
};

class NonFiniteEntry : public NumericError {
public:
    using NumericError::NumericError;
};

class InvalidCoordinate : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace varcond
