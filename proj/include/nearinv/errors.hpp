#pragma once

#include <stdexcept>
#include <string>

namespace nearinv {

/// Input or construction problem: malformed spec files, violated type
/// invariants (weights, Gram conditions, bad arguments). The CLI maps
/// these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A factorization hypothesis failed on the given space: near invariance
/// under division, or the norm condition. Carries a human-readable
/// description of the witness.
class HypothesisError : public std::runtime_error {
public:
    explicit HypothesisError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The space sits entirely inside phi*H and no defect space was declared.
/// Every element would need a zero of unbounded order at the zeros of phi,
/// so the only consistent limit is the zero subspace; the toolkit reports
/// this instead of iterating.
class ContainmentError : public std::runtime_error {
public:
    explicit ContainmentError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown mid-computation: ill-conditioned Gram matrices,
/// residuals beyond tolerance inside the contraction iteration.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nearinv
