#pragma once

#include <stdexcept>
#include <string>

namespace gausscone {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularGenerators : public Error {
public:
    using Error::Error;
};

/// A direction lies outside the (open or closed) spherical patch it must belong to.
class DomainViolation : public Error {
public:
    using Error::Error;
};

/// A radius or offset that must be strictly positive and finite is not.
class NonPositiveValue : public Error {
public:
    using Error::Error;
};

/// |<u, v>| fell below the transversality floor, so a log or ratio would blow up.
class NonTransversalPair : public Error {
public:
    using Error::Error;
};

class LPFailure : public Error {
public:
    using Error::Error;
};

class ConeMismatch : public Error {
public:
    using Error::Error;
};

class DirectionMismatch : public Error {
public:
    using Error::Error;
};

class MassZero : public Error {
public:
    using Error::Error;
};

class GridTooLarge : public Error {
public:
    using Error::Error;
};

class TiedPoint : public Error {
public:
    using Error::Error;
};

class IOError : public Error {
public:
    using Error::Error;
};

/// Malformed input document. `pointer()` is a JSON pointer to the offending field.
class ParseError : public Error {
public:
    ParseError(std::string pointer, const std::string& what)
        : Error(pointer + ": " + what), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

} // namespace gausscone
