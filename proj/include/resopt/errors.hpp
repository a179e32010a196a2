#pragma once

#include <stdexcept>
#include <string>

namespace resopt {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters, contracts, or configuration documents.
class ValidationError : public Error {
public:
    using Error::Error;
};

// An argument fell outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Filesystem / stream failures (reserved for the CLI layer).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace resopt
