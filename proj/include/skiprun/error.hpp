#pragma once

#include <stdexcept>
#include <string>

namespace skiprun {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

enum class CheckpointFault { BadMagic, VersionMismatch, Truncated, Structure };

const char* to_string(CheckpointFault fault);

class CheckpointError : public Error {
public:
    CheckpointError(CheckpointFault fault, const std::string& detail)
        : Error(std::string(to_string(fault)) + ": " + detail), fault_(fault) {}

    CheckpointFault fault() const { return fault_; }

private:
    CheckpointFault fault_;
};

}  // namespace skiprun
