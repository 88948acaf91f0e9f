#pragma once

#include <stdexcept>
#include <string>

namespace predformer {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shape / rank violations. Messages name the offending shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid model / training / CLI configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required (softmax input,
// gradients fed to the optimizer, training loss).
class NumericError : public Error {
public:
    using Error::Error;
};

// File format and I/O failures with a machine-checkable reason code.
class IoError : public Error {
public:
    enum class Code {
        BadMagic,
        VersionMismatch,
        BadHeader,
        Truncated,
        Unwritable,
        Unreadable,
        ConfigMismatch,
    };

    IoError(Code code, const std::string& msg) : Error(msg), code_(code) {}
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

}  // namespace predformer
