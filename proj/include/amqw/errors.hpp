#pragma once

#include <stdexcept>
#include <string>

namespace amqw {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad lattice, size mismatch, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The effective interaction was evaluated exactly on its pole.
class PoleError : public Error {
public:
    using Error::Error;
};

/// The requested analytic construction does not exist for these parameters.
class NotApplicable : public Error {
public:
    using Error::Error;
};

/// The resonance window is undefined (no atom-atom interaction).
class NoResonance : public Error {
public:
    using Error::Error;
};

/// An eigensolver or root search failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace amqw
