#pragma once

#include <stdexcept>
#include <string>

namespace flowsampler {

/// Base class for everything this library throws on purpose.
class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad caller input: dimension mismatch, invalid configuration, out-of-range knobs.
class ArgumentError : public FlowError {
public:
    using FlowError::FlowError;
};

/// A requested operation is not available for this input (e.g. Hessian of a
/// gradient-only custom target).
class UnsupportedError : public FlowError {
public:
    using FlowError::FlowError;
};

/// Matrix factorization failure: a covariance that should be SPD is not.
class DecompositionError : public FlowError {
public:
    using FlowError::FlowError;
};

/// Degenerate kernel input (zero bandwidth, zero scale).
class KernelError : public FlowError {
public:
    using FlowError::FlowError;
};

/// Integration domain does not contain the mass it should.
class TruncationError : public FlowError {
public:
    using FlowError::FlowError;
};

/// A particle update produced non-finite values.
class DivergenceError : public FlowError {
public:
    DivergenceError(const std::string& what, int particle)
        : FlowError(what), particle_index(particle) {}
    int particle_index;
};

/// CSV / plot input does not match the expected schema.
class FormatError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

} // namespace flowsampler
