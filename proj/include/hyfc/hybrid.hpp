#pragma once

// Hybrid predictor: the knowledge model and the reservoir are coupled at
// the input (a gamma fraction of nodes sees the raw state, the rest sees
// the model's one-step output) and jointly read out through one trained
// linear map over [model output; r*].

#include "hyfc/core.hpp"
#include "hyfc/knowledge.hpp"
#include "hyfc/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace hyfc {

struct HybridConfig {
    ReservoirConfig reservoir;
    double gamma = 0.5;  // fraction of reservoir nodes coupled to the raw input
    SystemId system = SystemId::lorenz;
    double epsilon = 0.0;  // knowledge-model error parameter

    KnowledgeModel make_model() const { return KnowledgeModel(system, epsilon, reservoir.dt); }

    void validate() const
    {
        reservoir.validate();
        if (gamma < 0.0 || gamma > 1.0)
            throw std::invalid_argument("HybridConfig: gamma must lie in [0, 1]");
        if (epsilon < 0.0) throw std::invalid_argument("HybridConfig: epsilon must be >= 0");
    }
};

/// Input coupling for the hybrid: D_r x 2M with exactly one nonzero per row.
/// The stacked input is [model output; raw state], so round(gamma * D_r)
/// randomly chosen rows place their nonzero in columns M..2M-1 and the rest
/// in columns 0..M-1. Values are uniform on [-sigma, sigma].
inline SparseMatrix build_hybrid_input_weights(int dim, int input_dim, double sigma, double gamma,
                                               std::uint64_t seed)
{
    if (dim < 1 || input_dim < 1)
        throw std::invalid_argument("build_hybrid_input_weights: dimensions must be >= 1");
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("build_hybrid_input_weights: gamma must lie in [0, 1]");

    std::mt19937_64 rng(mix_seed(seed, 0));
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int n_raw = static_cast<int>(std::lround(gamma * dim));
    std::vector<bool> raw_row(dim, false);
    for (int i = 0; i < n_raw; ++i) raw_row[order[i]] = true;

    std::uniform_int_distribution<int> column(0, input_dim - 1);
    std::uniform_real_distribution<double> weight(-sigma, sigma);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(dim);
    for (int i = 0; i < dim; ++i) {
        const int block = raw_row[i] ? input_dim : 0;
        triplets.emplace_back(i, block + column(rng), weight(rng));
    }
    SparseMatrix w(dim, 2 * input_dim);
    w.setFromTriplets(triplets.begin(), triplets.end());
    return w;
}

struct HybridNet {
    SparseMatrix adjacency;      // D_r x D_r
    SparseMatrix input_weights;  // D_r x 2M
    StateVector state;           // r(t)
    StateVector last_model_output;  // K[u(t - dt)] from the most recent drive

    Eigen::Index reservoir_dim() const { return adjacency.rows(); }
    Eigen::Index input_dim() const { return input_weights.cols() / 2; }
    void reset_state()
    {
        state.setZero();
        last_model_output.setZero();
    }
};

inline HybridNet make_hybrid(const HybridConfig& cfg, int input_dim)
{
    cfg.validate();
    HybridNet net;
    net.adjacency = build_adjacency(cfg.reservoir.reservoir_dim, cfg.reservoir.avg_degree,
                                    cfg.reservoir.spectral_radius, mix_seed(cfg.reservoir.seed, 0xA01));
    net.input_weights = build_hybrid_input_weights(cfg.reservoir.reservoir_dim, input_dim,
                                                   cfg.reservoir.input_scale, cfg.gamma,
                                                   mix_seed(cfg.reservoir.seed, 0xA02));
    net.state = StateVector::Zero(cfg.reservoir.reservoir_dim);
    net.last_model_output = StateVector::Zero(input_dim);
    return net;
}

/// Open-loop update r <- tanh(A r + W_in [K[u]; u]). Returns the model
/// output K[u], which doubles as a readout feature one step later.
inline StateVector drive_hybrid(HybridNet& net, const KnowledgeModel& model,
                                const Eigen::Ref<const StateVector>& u)
{
    const Eigen::Index m = net.input_dim();
    if (u.size() != m) throw std::invalid_argument("drive_hybrid: input dimension mismatch");
    StateVector k_out = model.step(u);
    StateVector stacked(2 * m);
    stacked.head(m) = k_out;
    stacked.tail(m) = u;
    StateVector z = net.adjacency * net.state;
    z += net.input_weights * stacked;
    net.state = z.array().tanh();
    net.last_model_output = k_out;
    return k_out;
}

/// Hybrid readout over the stacked feature vector [K output; r*], M x (M + D_r).
using HybridReadout = ReadoutWeights;

struct TrainedHybrid {
    HybridNet net;
    HybridReadout readout;
    double training_rms = 0.0;
};

/// Teacher-forced training: drive the hybrid open-loop over recorded data;
/// each post-washout step contributes the feature row [K[u(t-dt)]; r*(t)]
/// with target u(t). The readout solve is the shared Tikhonov fit.
inline TrainedHybrid train_hybrid(const HybridConfig& cfg, const Trajectory& training)
{
    cfg.validate();
    const ReservoirConfig& rc = cfg.reservoir;
    if (std::abs(training.dt - rc.dt) > 1e-12 * std::max(1.0, rc.dt))
        throw std::invalid_argument("train_hybrid: trajectory dt differs from config dt");
    const long washout = rc.washout_steps();
    const long n_drives = training.count() - 1;
    const long rows = n_drives - washout;
    if (rows < 1) throw std::invalid_argument("train_hybrid: training series shorter than washout");

    const auto m = training.dim();
    KnowledgeModel model = cfg.make_model();
    TrainedHybrid result;
    result.net = make_hybrid(cfg, static_cast<int>(m));

    Eigen::MatrixXd features(rows, m + rc.reservoir_dim);
    Eigen::MatrixXd targets(rows, m);
    for (long step = 0; step < n_drives; ++step) {
        StateVector k_out = drive_hybrid(result.net, model, training.sample(step));
        if (step >= washout) {
            const long row = step - washout;
            features.row(row).head(m) = k_out;
            features.row(row).tail(rc.reservoir_dim) = quadratic_features(result.net.state);
            targets.row(row) = training.sample(step + 1);
        }
    }
    RidgeFit fit = fit_readout_with_residual(features, targets, rc.ridge_beta);
    result.readout = std::move(fit.weights);
    result.training_rms = fit.residual_rms;
    return result;
}

/// Closed-loop hybrid prediction. Each step evaluates the knowledge model
/// once on the previous output; that value feeds both the reservoir input
/// stack and the readout feature block. A knowledge-model blowup or an
/// output beyond divergence_limit truncates and flags the result.
inline PredictResult predict_hybrid(HybridNet& net, const KnowledgeModel& model,
                                    const HybridReadout& readout, long steps, double t0 = 0.0,
                                    double divergence_limit =
                                        std::numeric_limits<double>::infinity())
{
    const Eigen::Index m = net.input_dim();
    if (readout.cols() != m + net.reservoir_dim())
        throw std::invalid_argument("predict_hybrid: readout width != M + reservoir dim");

    auto read_out = [&](const StateVector& k_out) -> StateVector {
        StateVector f(m + net.reservoir_dim());
        f.head(m) = k_out;
        f.tail(net.reservoir_dim()) = quadratic_features(net.state);
        return readout * f;
    };

    PredictResult result;
    Eigen::MatrixXd samples(m, steps);
    StateVector u = read_out(net.last_model_output);  // prediction at t0
    long produced = 0;
    for (long s = 0; s < steps; ++s) {
        StateVector k_out;
        try {
            k_out = drive_hybrid(net, model, u);
        } catch (const IntegrationBlowup&) {
            result.diverged = true;
            break;
        }
        u = read_out(k_out);
        if (!u.allFinite()) {
            result.diverged = true;
            break;
        }
        samples.col(produced++) = u;
        if (u.norm() > divergence_limit) {
            result.diverged = true;
            break;
        }
    }
    result.trajectory = Trajectory(samples.leftCols(produced), model.dt(), t0);
    return result;
}

/// As resynchronize() for the plain reservoir, but driving with the hybrid
/// input stack; the final segment sample marks the prediction start.
inline void resynchronize_hybrid(HybridNet& net, const KnowledgeModel& model,
                                 const Trajectory& recent)
{
    if (recent.count() == 0) return;
    if (recent.dim() != net.input_dim())
        throw std::invalid_argument("resynchronize_hybrid: segment dimension mismatch");
    for (long s = 0; s + 1 < recent.count(); ++s) drive_hybrid(net, model, recent.sample(s));
}

}  // namespace hyfc
