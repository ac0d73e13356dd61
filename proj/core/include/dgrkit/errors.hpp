#pragma once

#include <stdexcept>

namespace dgr {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, non-finite entries, bad ranges.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Lyapunov solve requested for a matrix with spectral radius >= 1.
class NotSchurStable : public Error {
public:
    using Error::Error;
};

// Riccati fixed-point iteration failed to converge (or closed loop unstable).
class DareDiverged : public Error {
public:
    using Error::Error;
};

// Instability-number order outside 1..n.
class InvalidOrder : public Error {
public:
    using Error::Error;
};

// Bound formula preconditions (range inclusion / product condition) violated.
class BoundNotApplicable : public Error {
public:
    using Error::Error;
};

// Eigenvector basis too ill-conditioned for mode analysis.
class DefectiveMatrix : public Error {
public:
    using Error::Error;
};

// Identification requested before any data was collected.
class InsufficientData : public Error {
public:
    using Error::Error;
};

// Recursive regulator started from the zero state.
class DegenerateStart : public Error {
public:
    using Error::Error;
};

// LMI witness missing the matrices its kind requires.
class InvalidWitness : public Error {
public:
    using Error::Error;
};

// Input file could not be parsed; message carries a line/column diagnostic.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace dgr
