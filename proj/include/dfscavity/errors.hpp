#pragma once

#include <stdexcept>
#include <string>

namespace dfscavity {

// Bad input: nonsensical parameters, malformed config files, preconditions
// violated by the caller. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical self-check failed (positivity lost, residual above tolerance,
// certification mismatch). CLI maps this to exit code 3.
class DiagnosticsError : public std::runtime_error {
public:
    explicit DiagnosticsError(const std::string& what) : std::runtime_error(what) {}
};

// The factorized propagator hit a zero of F1(t); the requested time sits on a
// coordinate singularity of the factorization, not a physical blow-up.
class SingularFactorizationError : public DiagnosticsError {
public:
    explicit SingularFactorizationError(const std::string& what) : DiagnosticsError(what) {}
};

// Requested state needs more Fock levels than the chosen truncation holds.
class TruncationError : public ValidationError {
public:
    explicit TruncationError(const std::string& what) : ValidationError(what) {}
};

} // namespace dfscavity
