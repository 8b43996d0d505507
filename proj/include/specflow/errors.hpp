#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument or violated precondition (shape mismatch, out-of-range value,
// invalid option combination).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Malformed or foreign file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Input carries no usable flow information: textureless images, no valid
// frame pair, or a numerically singular normal system.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace specflow
