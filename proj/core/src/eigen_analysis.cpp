#include "mgstab/eigen_analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace mgstab {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "unknown";
}

EigenResult eigen_decompose(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw EigenSolverError("matrix is not square");
    }
    if (!a.allFinite()) {
        throw EigenSolverError("matrix has non-finite entries");
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) {
        throw EigenSolverError("QR iteration did not converge");
    }

    const Eigen::Index n = a.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXcd raw = solver.eigenvalues();
    // real part descending; conjugate pairs adjacent, +Im first
    std::sort(order.begin(), order.end(), [&raw](Eigen::Index lhs, Eigen::Index rhs) {
        if (raw[lhs].real() != raw[rhs].real()) return raw[lhs].real() > raw[rhs].real();
        const double la = std::abs(raw[lhs].imag());
        const double ra = std::abs(raw[rhs].imag());
        if (la != ra) return la < ra;
        return raw[lhs].imag() > raw[rhs].imag();
    });

    EigenResult out;
    // dimension-normalized Frobenius norm: the per-entry RMS scale of A, so
    // eigenvalue thresholds track entry magnitudes rather than matrix size
    out.matrix_norm = a.norm() / static_cast<double>(n);
    out.lambdas.resize(n);
    out.vectors.resize(n, n);
    out.residuals.resize(n);
    const Eigen::MatrixXcd raw_vectors = solver.eigenvectors();
    const Eigen::MatrixXcd a_c = a.cast<std::complex<double>>();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.lambdas[k] = raw[src];
        Eigen::VectorXcd v = raw_vectors.col(src);
        v /= v.norm();
        out.vectors.col(k) = v;
        out.residuals[k] = (a_c * v - out.lambdas[k] * v).norm();
    }

    const double bound = 1e-8 * std::max(out.matrix_norm, 1e-300);
    if ((out.residuals.array() > bound).any()) {
        throw EigenSolverError("eigenpair residual exceeds 1e-8 * ||A||");
    }
    return out;
}

bool is_zero_mode(std::complex<double> lambda, double scale) {
    return std::abs(lambda) <= 1e-6 * scale;
}

StabilityVerdict classify(const EigenResult& eig, double scale) {
    StabilityVerdict verdict;
    verdict.max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < eig.lambdas.size(); ++k) {
        if (is_zero_mode(eig.lambdas[k], scale)) {
            ++verdict.zero_mode_count;
            continue;
        }
        verdict.max_re = std::max(verdict.max_re, eig.lambdas[k].real());
    }
    const double threshold = 1e-6 * scale;
    if (verdict.max_re < -threshold) {
        verdict.classification = Stability::stable;
    } else if (verdict.max_re > threshold) {
        verdict.classification = Stability::unstable;
    } else {
        verdict.classification = Stability::marginal;
    }
    return verdict;
}

Eigen::MatrixXd modal_response(const EigenResult& eig, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& x_e,
                               const std::vector<double>& times) {
    const Eigen::Index n = eig.lambdas.size();
    if (x0.size() != n || x_e.size() != n) {
        throw ModalDecompositionError("state vector size does not match the decomposition");
    }

    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(eig.vectors);
    const double sv_min = svd.singularValues().minCoeff();
    const double sv_max = svd.singularValues().maxCoeff();
    if (!(sv_min > 0.0) || sv_max / sv_min > 1e10) {
        throw ModalDecompositionError(
            "eigenvector matrix is too ill-conditioned for modal superposition");
    }

    const Eigen::VectorXcd amplitudes =
        eig.vectors.partialPivLu().solve((x0 - x_e).cast<std::complex<double>>());

    Eigen::MatrixXd trajectory(static_cast<Eigen::Index>(times.size()), n);
    for (std::size_t s = 0; s < times.size(); ++s) {
        Eigen::VectorXcd modal = Eigen::VectorXcd::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            modal += amplitudes[k] * std::exp(eig.lambdas[k] * times[s]) * eig.vectors.col(k);
        }
        trajectory.row(static_cast<Eigen::Index>(s)) = (x_e + modal.real()).transpose();
    }
    return trajectory;
}

}  // namespace mgstab
