#pragma once

// Sparse spectral radius estimation and Tikhonov-regularized least squares,
// the two numerical kernels behind reservoir construction and training.

#include "hyfc/core.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <random>
#include <stdexcept>

namespace hyfc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Largest eigenvalue magnitude by power iteration. A quadratic fit over the
/// last three iterates resolves complex-conjugate dominant pairs, whose plain
/// norm ratio would oscillate forever. Throws SpectralRadiusError (carrying
/// the last estimate) if the estimate has not stabilized within max_iter.
inline double spectral_radius(const SparseMatrix& a, double tol = 1e-8, int max_iter = 10000)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
    const Eigen::Index n = a.rows();
    if (n == 0 || a.nonZeros() == 0) return 0.0;

    std::mt19937_64 rng(0x5b8f1a2c90d34e77ULL);  // fixed stream: estimates are reproducible
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0[i] = unit(rng);
    x0.normalize();

    Eigen::VectorXd x1 = a * x0;
    if (x1.norm() == 0.0) return 0.0;

    double estimate = x1.norm();
    int stable = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd x2 = a * x1;
        const double n1 = x1.norm();
        if (n1 == 0.0) return 0.0;

        double next = x2.norm() / n1;
        // Quadratic refinement: fit x2 ~ alpha*x1 + beta*x0 and take the
        // dominant root magnitude of lambda^2 - alpha*lambda - beta.
        const double a11 = x1.squaredNorm(), a00 = x0.squaredNorm(), a10 = x1.dot(x0);
        const double det = a11 * a00 - a10 * a10;
        if (det > 1e-12 * a11 * a00) {
            const double b1 = x1.dot(x2), b0 = x0.dot(x2);
            const double alpha = (a00 * b1 - a10 * b0) / det;
            const double beta = (a11 * b0 - a10 * b1) / det;
            const double disc = alpha * alpha + 4.0 * beta;
            const double mag =
                disc >= 0.0
                    ? std::max(std::abs(0.5 * (alpha + std::sqrt(disc))),
                               std::abs(0.5 * (alpha - std::sqrt(disc))))
                    : std::sqrt(-beta);
            if (std::isfinite(mag) && mag > 0.0) next = mag;
        }

        stable = std::abs(next - estimate) <= tol * std::max(next, 1e-30) ? stable + 1 : 0;
        estimate = next;
        if (stable >= 3) return estimate;

        x0 = x1 / n1;
        x1 = x2 / n1;
    }
    throw SpectralRadiusError("spectral_radius: power iteration did not stabilize", estimate);
}

/// Trained linear readout, one output row per target component (M x F).
using ReadoutWeights = Eigen::MatrixXd;

namespace detail {

/// Solve (gram + beta*I) W^T = cross for W given gram = X^T X, cross = X^T Y.
inline ReadoutWeights solve_ridge_normal(const Eigen::MatrixXd& gram,
                                         const Eigen::MatrixXd& cross, double beta)
{
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += beta;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    const auto d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || dmax <= 0.0 || d.minCoeff() <= dmax * 1e-13)
        throw RankDeficiencyError(
            "ridge normal equations are rank deficient; regularize with beta > 0");
    return ldlt.solve(cross).transpose();
}

}  // namespace detail

/// Tikhonov-regularized linear regression: W = Y^T X (X^T X + beta I)^-1,
/// with X one feature row per training step and Y the matching targets.
inline ReadoutWeights fit_readout(const Eigen::MatrixXd& features,
                                  const Eigen::MatrixXd& targets, double beta)
{
    if (features.rows() != targets.rows())
        throw std::invalid_argument("fit_readout: feature/target row counts differ");
    if (beta < 0.0) throw std::invalid_argument("fit_readout: beta must be >= 0");
    const Eigen::Index f = features.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(f, f);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXd cross = features.transpose() * targets;
    return detail::solve_ridge_normal(gram, cross, beta);
}

struct RidgeFit {
    ReadoutWeights weights;
    double residual_rms = 0.0;  // sqrt(mean over rows of |W x - y|^2)
};

/// fit_readout plus the in-sample residual, computed from the normal
/// equations so no second pass over the data is needed.
inline RidgeFit fit_readout_with_residual(const Eigen::MatrixXd& features,
                                          const Eigen::MatrixXd& targets, double beta)
{
    if (features.rows() != targets.rows())
        throw std::invalid_argument("fit_readout: feature/target row counts differ");
    if (beta < 0.0) throw std::invalid_argument("fit_readout: beta must be >= 0");
    const Eigen::Index f = features.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(f, f);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
    gram = gram.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXd cross = features.transpose() * targets;

    RidgeFit fit;
    fit.weights = detail::solve_ridge_normal(gram, cross, beta);
    // |X W^T - Y|^2 = tr(W G W^T) - 2 tr(W cross) + |Y|^2
    const double quad = (fit.weights * gram).cwiseProduct(fit.weights).sum();
    const double lin = fit.weights.cwiseProduct(cross.transpose()).sum();
    const double ss = std::max(0.0, quad - 2.0 * lin + targets.squaredNorm());
    fit.residual_rms = std::sqrt(ss / double(features.rows()));
    return fit;
}

}  // namespace hyfc
