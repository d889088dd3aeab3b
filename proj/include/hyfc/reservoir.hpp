#pragma once

// Echo-state reservoir: sparse random network construction, open-loop
// training drive, Tikhonov readout fit, closed-loop prediction, and
// resynchronization for training reusability.

#include "hyfc/core.hpp"
#include "hyfc/linalg.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace hyfc {

struct ReservoirConfig {
    int reservoir_dim = 500;      // D_r
    double spectral_radius = 0.4; // rho, target |lambda_max| of the adjacency
    double avg_degree = 3.0;      // <d>, mean in-network degree
    double input_scale = 0.15;    // sigma, input weights drawn from [-sigma, sigma]
    double dt = 0.1;
    double train_time = 100.0;    // T
    double ridge_beta = 1e-6;     // beta
    double resync_time = 10.0;    // xi, also the training washout
    std::uint64_t seed = 0;

    long washout_steps() const { return std::lround(resync_time / dt); }

    void validate() const
    {
        if (reservoir_dim < 1) throw std::invalid_argument("ReservoirConfig: reservoir_dim must be >= 1");
        if (spectral_radius <= 0.0) throw std::invalid_argument("ReservoirConfig: spectral_radius must be > 0");
        if (avg_degree <= 0.0 || avg_degree > reservoir_dim)
            throw std::invalid_argument("ReservoirConfig: avg_degree must lie in (0, reservoir_dim]");
        if (input_scale <= 0.0) throw std::invalid_argument("ReservoirConfig: input_scale must be > 0");
        if (dt <= 0.0) throw std::invalid_argument("ReservoirConfig: dt must be > 0");
        if (train_time <= 0.0) throw std::invalid_argument("ReservoirConfig: train_time must be > 0");
        if (ridge_beta < 0.0) throw std::invalid_argument("ReservoirConfig: ridge_beta must be >= 0");
        if (resync_time < 0.0) throw std::invalid_argument("ReservoirConfig: resync_time must be >= 0");
    }
};

/// Sparse Erdos-Renyi adjacency: every directed entry is independently
/// nonzero with probability avg_degree/dim, weights uniform on [-1, 1], then
/// the whole matrix is rescaled so its spectral radius equals rho. A draw
/// with spectral radius zero is rebuilt from the next seed stream.
inline SparseMatrix build_adjacency(int dim, double avg_degree, double rho, std::uint64_t seed)
{
    if (dim < 1) throw std::invalid_argument("build_adjacency: dim must be >= 1");
    if (rho <= 0.0) throw std::invalid_argument("build_adjacency: rho must be > 0");
    const double p = avg_degree / dim;
    if (p <= 0.0 || p > 1.0) throw std::invalid_argument("build_adjacency: avg_degree out of range");

    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        std::mt19937_64 rng(mix_seed(seed, attempt));
        std::bernoulli_distribution edge(p);
        std::uniform_real_distribution<double> weight(-1.0, 1.0);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(static_cast<std::size_t>(avg_degree * dim * 1.2) + 16);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (edge(rng)) triplets.emplace_back(i, j, weight(rng));

        SparseMatrix a(dim, dim);
        a.setFromTriplets(triplets.begin(), triplets.end());

        double lambda = 0.0;
        try {
            lambda = spectral_radius(a);
        } catch (const SpectralRadiusError&) {
            // settle it exactly; slow but only reached on pathological draws
            Eigen::MatrixXd dense(a);
            lambda = Eigen::EigenSolver<Eigen::MatrixXd>(dense, false).eigenvalues().cwiseAbs().maxCoeff();
        }
        if (lambda > 0.0) {
            a *= rho / lambda;
            return a;
        }
        std::cerr << "build_adjacency: draw " << attempt
                  << " had spectral radius 0, rebuilding from next seed stream\n";
    }
    throw std::runtime_error("build_adjacency: could not draw a matrix with nonzero spectral radius");
}

/// Input coupling with exactly one nonzero per row, placed in a uniformly
/// chosen column with value uniform on [-sigma, sigma].
inline SparseMatrix build_input_weights(int dim, int input_dim, double sigma, std::uint64_t seed)
{
    if (dim < 1 || input_dim < 1)
        throw std::invalid_argument("build_input_weights: dimensions must be >= 1");
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::uniform_int_distribution<int> column(0, input_dim - 1);
    std::uniform_real_distribution<double> weight(-sigma, sigma);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(dim);
    for (int i = 0; i < dim; ++i) triplets.emplace_back(i, column(rng), weight(rng));
    SparseMatrix w(dim, input_dim);
    w.setFromTriplets(triplets.begin(), triplets.end());
    return w;
}

struct ReservoirNet {
    SparseMatrix adjacency;      // D_r x D_r
    SparseMatrix input_weights;  // D_r x M
    StateVector state;           // r(t), componentwise in (-1, 1) after any drive

    Eigen::Index reservoir_dim() const { return adjacency.rows(); }
    Eigen::Index input_dim() const { return input_weights.cols(); }
    void reset_state() { state.setZero(); }
};

/// Deterministic construction from config: adjacency and input weights come
/// from separate streams of the config seed, state starts at zero.
inline ReservoirNet make_reservoir(const ReservoirConfig& cfg, int input_dim)
{
    cfg.validate();
    ReservoirNet net;
    net.adjacency = build_adjacency(cfg.reservoir_dim, cfg.avg_degree, cfg.spectral_radius,
                                    mix_seed(cfg.seed, 0xA01));
    net.input_weights =
        build_input_weights(cfg.reservoir_dim, input_dim, cfg.input_scale, mix_seed(cfg.seed, 0xA02));
    net.state = StateVector::Zero(cfg.reservoir_dim);
    return net;
}

/// Open-loop update r <- tanh(A r + W_in u).
inline void drive(ReservoirNet& net, const Eigen::Ref<const StateVector>& u)
{
    if (u.size() != net.input_dim())
        throw std::invalid_argument("drive: input dimension mismatch");
    StateVector z = net.adjacency * net.state;
    z += net.input_weights * u;
    net.state = z.array().tanh();
}

/// Readout features r*: odd components (1-based) stay linear, even
/// components are squared.
inline StateVector quadratic_features(const StateVector& r)
{
    StateVector out(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
        out[i] = (i % 2 == 0) ? r[i] : r[i] * r[i];
    return out;
}

struct TrainedReservoir {
    ReservoirNet net;        // state left at the end of the training drive
    ReadoutWeights readout;  // M x D_r, applied to r*
    double training_rms = 0.0;
};

/// Drive the reservoir open-loop through the training series from r = 0,
/// discard the first resync_time worth of steps as washout, and fit the
/// readout so that W_out r*(t) approximates u(t).
inline TrainedReservoir train_reservoir(const ReservoirConfig& cfg, const Trajectory& training)
{
    cfg.validate();
    if (std::abs(training.dt - cfg.dt) > 1e-12 * std::max(1.0, cfg.dt))
        throw std::invalid_argument("train_reservoir: trajectory dt differs from config dt");
    const long washout = cfg.washout_steps();
    const long n_drives = training.count() - 1;
    const long rows = n_drives - washout;
    if (rows < 1)
        throw std::invalid_argument("train_reservoir: training series shorter than washout");

    TrainedReservoir result;
    result.net = make_reservoir(cfg, static_cast<int>(training.dim()));

    Eigen::MatrixXd features(rows, cfg.reservoir_dim);
    Eigen::MatrixXd targets(rows, training.dim());
    for (long m = 0; m < n_drives; ++m) {
        drive(result.net, training.sample(m));
        if (m >= washout) {
            features.row(m - washout) = quadratic_features(result.net.state);
            targets.row(m - washout) = training.sample(m + 1);
        }
    }
    RidgeFit fit = fit_readout_with_residual(features, targets, cfg.ridge_beta);
    result.readout = std::move(fit.weights);
    result.training_rms = fit.residual_rms;
    return result;
}

struct PredictResult {
    Trajectory trajectory;  // samples at t0+dt ... t0+steps*dt (possibly truncated)
    bool diverged = false;
};

/// Closed-loop autonomous prediction: feed the readout back as input. Output
/// growth beyond divergence_limit truncates the trajectory and flags the
/// result instead of failing, so a trial can still be scored.
inline PredictResult predict_closed_loop(ReservoirNet& net, const ReadoutWeights& readout,
                                         long steps, double dt, double t0 = 0.0,
                                         double divergence_limit =
                                             std::numeric_limits<double>::infinity())
{
    if (readout.cols() != net.reservoir_dim())
        throw std::invalid_argument("predict_closed_loop: readout width != reservoir dim");
    PredictResult result;
    Eigen::MatrixXd samples(readout.rows(), steps);
    StateVector y = readout * quadratic_features(net.state);
    long produced = 0;
    for (long s = 0; s < steps; ++s) {
        drive(net, y);
        y = readout * quadratic_features(net.state);
        if (!y.allFinite()) {
            result.diverged = true;
            break;
        }
        samples.col(produced++) = y;
        if (y.norm() > divergence_limit) {
            result.diverged = true;
            break;
        }
    }
    result.trajectory = Trajectory(samples.leftCols(produced), dt, t0);
    return result;
}

/// Re-align the reservoir to the true dynamics by driving open-loop over a
/// recent segment (all samples except the final one, which marks the
/// prediction start). The readout is untouched.
inline void resynchronize(ReservoirNet& net, const Trajectory& recent)
{
    if (recent.count() == 0) return;
    if (recent.dim() != net.input_dim())
        throw std::invalid_argument("resynchronize: segment dimension mismatch");
    for (long m = 0; m + 1 < recent.count(); ++m) drive(net, recent.sample(m));
}

}  // namespace hyfc
