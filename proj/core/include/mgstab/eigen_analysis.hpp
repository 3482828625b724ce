#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mgstab/errors.hpp"

namespace mgstab {

/// Eigen-decomposition of a real square matrix. Eigenvalues are sorted by
/// descending real part with conjugate pairs adjacent (positive imaginary
/// part first); eigenvectors are unit 2-norm columns in matching order.
struct EigenResult {
    Eigen::VectorXcd lambdas;
    Eigen::MatrixXcd vectors;
    Eigen::VectorXd residuals;  // ||A v - lambda v|| per pair
    double matrix_norm = 0.0;   // dimension-normalized Frobenius norm ||A||_F / n
};

/// Throws EigenSolverError on iteration failure or when the residual bound
/// ||A v - lambda v|| <= 1e-8 ||A|| is violated for any pair.
EigenResult eigen_decompose(const Eigen::MatrixXd& a);

enum class Stability { stable, unstable, marginal };
const char* to_string(Stability s);

/// Classification after removing structural zero modes. max_re is the largest
/// real part among the remaining eigenvalues.
struct StabilityVerdict {
    Stability classification = Stability::marginal;
    double max_re = 0.0;
    int zero_mode_count = 0;
};

/// An eigenvalue counts as a structural zero mode when |lambda| <= 1e-6*scale.
bool is_zero_mode(std::complex<double> lambda, double scale);

/// Stable when the remaining max Re < -1e-6*scale, unstable when > +1e-6*scale,
/// marginal otherwise. scale is the matrix norm (pass eig.matrix_norm).
StabilityVerdict classify(const EigenResult& eig, double scale);

/// Modal superposition X(t) = x_e + Re(V e^{Lambda t} V^{-1} (x0 - x_e)).
/// Returns one row per requested time, one column per state. Throws
/// ModalDecompositionError when the eigenvector matrix condition number
/// exceeds 1e10.
Eigen::MatrixXd modal_response(const EigenResult& eig, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& x_e,
                               const std::vector<double>& times);

}  // namespace mgstab
