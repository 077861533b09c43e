#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relaxdice {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Arguments violate a documented precondition (bad shape, out-of-range value).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A density ratio p/q was requested where q vanishes but p does not.
class SupportViolation : public Error {
public:
    SupportViolation(const std::string& what, std::size_t atom)
        : Error(what), atom_(atom) {}
    std::size_t atom() const noexcept { return atom_; }

private:
    std::size_t atom_;
};

/// Training produced a non-finite loss or gradient.
class TrainingFailure : public Error {
public:
    TrainingFailure(const std::string& what, long step) : Error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// On-disk container is malformed (magic, version, truncation, checksum).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed where the mathematics says it cannot.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace relaxdice
