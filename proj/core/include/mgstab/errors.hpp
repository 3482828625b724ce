#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace mgstab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration input; the message names the field.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Newton iteration did not reach the residual tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& msg, double residual, int iterations)
        : Error(msg), residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_ = 0.0;
    int iterations_ = 0;
};

/// 1 + Z_L * sum(1/Z_i) vanished; the bus voltage relation has no solution.
class DegenerateNetworkError : public Error {
public:
    using Error::Error;
};

/// Equilibrium quantities that the linearization divides by are zero.
class DegenerateEquilibriumError : public Error {
public:
    using Error::Error;
};

struct SimTrace;

/// A line current magnitude fell to the polar-coordinate floor, where the
/// current-angle equation divides by zero. Carries the simulation time and,
/// when raised inside integrate(), the trace accumulated up to the halt.
class SingularityError : public Error {
public:
    SingularityError(const std::string& msg, double time)
        : Error(msg), time_(time) {}
    double time() const noexcept { return time_; }
    std::shared_ptr<const SimTrace> partial_trace;

private:
    double time_ = 0.0;
};

class EigenSolverError : public Error {
public:
    using Error::Error;
};

/// Eigenvector matrix too ill-conditioned for modal superposition.
class ModalDecompositionError : public Error {
public:
    using Error::Error;
};

class NumericalDifferentiationError : public Error {
public:
    using Error::Error;
};

/// find_boundary precondition violated: the given scales do not bracket a
/// stable-to-unstable transition.
class BracketingError : public Error {
public:
    using Error::Error;
};

}  // namespace mgstab
