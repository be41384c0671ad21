#pragma once

#include <stdexcept>
#include <string>

namespace twostep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a majorant family or problem.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach its tolerance within the subdivision budget.
class QuadratureError : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class DegenerateGrid : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// The radius condition already fails arbitrarily close to the root.
class InfeasibleAtOrigin : public Error {
public:
    using Error::Error;
};

class NegativeDiscriminant : public Error {
public:
    using Error::Error;
};

class DenominatorNonpositive : public Error {
public:
    using Error::Error;
};

class InvalidQ : public Error {
public:
    using Error::Error;
};

class MissingRoot : public Error {
public:
    using Error::Error;
};

/// Malformed textual input (family specs, CSV tables, JSON reports).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace twostep
