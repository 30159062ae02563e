#pragma once

#include <stdexcept>
#include <string>

namespace sylrate {

// Base class for all recoverable errors raised by the library. The CLI maps
// these to exit code 1; anything else escaping to main() is exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Binary or structured file content violates its format (wav header fields,
// manifest schema, params file schema).
class FormatError : public Error {
public:
    using Error::Error;
};

// Text input could not be parsed (annotation lines, numbers).
class ParseError : public Error {
public:
    using Error::Error;
};

// An operation precondition or a value constraint was violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace sylrate
