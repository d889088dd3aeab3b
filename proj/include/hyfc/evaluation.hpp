#pragma once

// Normalized forecast error, valid-time scoring, and the interval/realization
// trial protocol with median-and-quartile summaries.

#include "hyfc/core.hpp"
#include "hyfc/hybrid.hpp"
#include "hyfc/knowledge.hpp"
#include "hyfc/reservoir.hpp"
#include "hyfc/systems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hyfc {

enum class Method { knowledge, reservoir, hybrid };

inline std::string to_string(Method m)
{
    switch (m) {
        case Method::knowledge: return "knowledge";
        case Method::reservoir: return "reservoir";
        case Method::hybrid: return "hybrid";
    }
    throw std::invalid_argument("to_string: unknown method");
}

inline Method parse_method(const std::string& name)
{
    if (name == "knowledge") return Method::knowledge;
    if (name == "reservoir") return Method::reservoir;
    if (name == "hybrid") return Method::hybrid;
    throw std::invalid_argument("unknown method '" + name + "' (expected knowledge|reservoir|hybrid)");
}

struct EvalConfig {
    double threshold = 0.4;         // f, normalized error bound defining t_v
    double interval_length = 250.0; // tau
    int intervals = 20;
    int realizations = 32;
    double lyapunov_rate = 0.0;     // lambda_max for Lyapunov-unit reporting
    double gap = 10.0;              // spacing between interval blocks

    void validate() const
    {
        if (threshold <= 0.0 || threshold >= 1.0)
            throw std::invalid_argument("EvalConfig: threshold must lie in (0, 1)");
        if (interval_length <= 0.0) throw std::invalid_argument("EvalConfig: interval_length must be > 0");
        if (intervals < 1 || realizations < 1)
            throw std::invalid_argument("EvalConfig: counts must be >= 1");
    }
};

/// Root-mean-square state norm over a series; the fixed denominator of the
/// normalized error, computed once per dataset from the training segment.
inline double signal_rms(const Trajectory& t)
{
    if (t.empty()) throw std::invalid_argument("signal_rms: empty trajectory");
    return std::sqrt(t.samples.squaredNorm() / double(t.count()));
}

/// E = |u_true - u_pred| / denom.
inline double normalized_error(const Eigen::Ref<const StateVector>& u_true,
                               const Eigen::Ref<const StateVector>& u_pred, double denom)
{
    if (u_true.size() != u_pred.size())
        throw std::invalid_argument("normalized_error: dimension mismatch");
    if (!(denom > 0.0)) throw std::invalid_argument("normalized_error: denom must be > 0");
    return (u_true - u_pred).norm() / denom;
}

struct ValidTime {
    double t_v = 0.0;
    bool censored = false;  // error never exceeded the threshold
};

/// Elapsed time until the error series first exceeds f. Entry i of the
/// series is the error at elapsed time (i+1)*dt; if no entry exceeds f the
/// result is the series duration, flagged censored.
inline ValidTime valid_time(const std::vector<double>& error_series, double f, double dt)
{
    if (error_series.empty()) throw std::invalid_argument("valid_time: empty series");
    for (std::size_t i = 0; i < error_series.size(); ++i)
        if (error_series[i] > f) return {double(i + 1) * dt, false};
    return {double(error_series.size()) * dt, true};
}

/// Linear-interpolation quantile (R-7 convention) of an unsorted sample.
inline double quantile(std::vector<double> values, double p)
{
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - double(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct TrialResult {
    Method method = Method::knowledge;
    int reservoir_dim = 0;
    double epsilon = 0.0;
    std::uint64_t realization_seed = 0;
    int interval_index = 0;
    double t_v = 0.0;
    double t_v_lyapunov = 0.0;
    bool censored = false;
};

struct TrialSummary {
    double median = 0.0, q1 = 0.0, q3 = 0.0;          // Lyapunov units
    double median_tv = 0.0, q1_tv = 0.0, q3_tv = 0.0;  // raw time units
    long trials = 0;
    long censored = 0;
};

inline TrialSummary summarize(const std::vector<TrialResult>& results, double lyapunov_rate)
{
    if (results.empty()) throw std::invalid_argument("summarize: no trials");
    std::vector<double> tv;
    tv.reserve(results.size());
    TrialSummary s;
    for (const auto& r : results) {
        tv.push_back(r.t_v);
        if (r.censored) ++s.censored;
    }
    s.trials = long(results.size());
    s.median_tv = quantile(tv, 0.5);
    s.q1_tv = quantile(tv, 0.25);
    s.q3_tv = quantile(tv, 0.75);
    s.median = s.median_tv * lyapunov_rate;
    s.q1 = s.q1_tv * lyapunov_rate;
    s.q3 = s.q3_tv * lyapunov_rate;
    return s;
}

/// Per-trial seed derivation. Axes that cannot influence a method are left
/// out of its stream: the knowledge model is deterministic (no realization,
/// no reservoir size) and the plain reservoir never sees epsilon, so sweeps
/// over those axes reproduce identical trials for those methods.
inline std::uint64_t trial_seed(std::uint64_t master, Method method, int reservoir_dim,
                                double epsilon, int realization)
{
    std::uint64_t h = mix_seed(master, 0x74726c /* "trl" */);
    h = mix_seed(h, static_cast<std::uint64_t>(method));
    if (method != Method::knowledge) {
        h = mix_seed(h, static_cast<std::uint64_t>(reservoir_dim));
        h = mix_seed(h, static_cast<std::uint64_t>(realization));
    }
    if (method != Method::reservoir) {
        std::uint64_t bits = 0;
        static_assert(sizeof(bits) == sizeof(epsilon));
        std::memcpy(&bits, &epsilon, sizeof(bits));
        h = mix_seed(h, bits);
    }
    return h;
}

/// Shared ground-truth data for one protocol run: a contiguous long run of
/// the true system split into the training segment (washout prefix plus
/// train_time) and the evaluation segment holding all prediction intervals.
struct TrialData {
    Trajectory training;
    Trajectory evaluation;
    double signal_rms = 0.0;
};

inline TrialData make_trial_data(SystemId system, const ReservoirConfig& rc,
                                 const EvalConfig& eval, std::uint64_t data_seed)
{
    rc.validate();
    eval.validate();
    const double block = eval.interval_length + rc.resync_time + eval.gap;
    const double train_span = rc.train_time + rc.resync_time;
    const double total = train_span + eval.intervals * block;
    Trajectory run = generate_trajectory(system, total, rc.dt, 0.0, data_seed);

    const long split = std::lround(train_span / rc.dt);
    TrialData data;
    data.training = run.segment(0, split + 1);
    // the evaluation segment reuses the boundary sample: one continuous run
    data.evaluation = run.segment(split, run.count() - split);
    data.signal_rms = signal_rms(data.training);
    return data;
}

/// Optional capture of one trial's trajectories for plotting.
struct TrialCapture {
    Eigen::MatrixXd truth;      // M x n, truth at elapsed times dt ... n*dt
    Eigen::MatrixXd predicted;  // M x produced
    std::vector<double> error_series;
    double dt = 0.0;
};

namespace detail {

struct IntervalLayout {
    long xi_steps, tau_steps, block_steps;

    IntervalLayout(const ReservoirConfig& rc, const EvalConfig& eval)
        : xi_steps(std::lround(rc.resync_time / rc.dt)),
          tau_steps(std::lround(eval.interval_length / rc.dt)),
          block_steps(xi_steps + tau_steps + std::lround(eval.gap / rc.dt))
    {
    }
    long block_start(int k) const { return k * block_steps; }
    long prediction_start(int k) const { return block_start(k) + xi_steps; }
};

/// Score a predicted series against truth starting right after index p0.
/// Missing samples (divergence truncation) count as an immediate exceedance.
inline void score_trial(const Trajectory& evaluation, long p0, const Eigen::MatrixXd& predicted,
                        bool diverged, double denom, const EvalConfig& eval, double dt,
                        long tau_steps, TrialResult& out, TrialCapture* capture)
{
    std::vector<double> errors(static_cast<std::size_t>(predicted.cols()));
    for (Eigen::Index i = 0; i < predicted.cols(); ++i)
        errors[static_cast<std::size_t>(i)] =
            normalized_error(evaluation.sample(p0 + 1 + i), predicted.col(i), denom);

    ValidTime vt;
    if (errors.empty()) {
        vt = {dt, false};  // diverged on the very first step
    } else {
        vt = valid_time(errors, eval.threshold, dt);
        if (vt.censored && (diverged || predicted.cols() < tau_steps)) {
            vt.t_v = std::min(double(tau_steps) * dt, double(predicted.cols() + 1) * dt);
            vt.censored = false;
        }
    }
    out.t_v = vt.t_v;
    out.t_v_lyapunov = vt.t_v * eval.lyapunov_rate;
    out.censored = vt.censored;

    if (capture) {
        capture->truth = evaluation.samples.middleCols(p0 + 1, tau_steps);
        capture->predicted = predicted;
        capture->error_series = std::move(errors);
        capture->dt = dt;
    }
}

inline TrialResult run_knowledge_trial(const KnowledgeModel& model, const TrialData& data,
                                       const EvalConfig& eval, const IntervalLayout& lay,
                                       int interval, std::uint64_t seed, TrialCapture* capture)
{
    TrialResult out;
    out.method = Method::knowledge;
    out.epsilon = model.epsilon();
    out.realization_seed = seed;
    out.interval_index = interval;

    const long p0 = lay.prediction_start(interval);
    Eigen::MatrixXd predicted(data.evaluation.dim(), lay.tau_steps);
    StateVector u = data.evaluation.sample(p0);
    bool diverged = false;
    long produced = 0;
    for (long s = 0; s < lay.tau_steps; ++s) {
        try {
            u = model.step(u);
        } catch (const IntegrationBlowup&) {
            diverged = true;
            break;
        }
        predicted.col(produced++) = u;
    }
    score_trial(data.evaluation, p0, predicted.leftCols(produced), diverged, data.signal_rms,
                eval, model.dt(), lay.tau_steps, out, capture);
    return out;
}

}  // namespace detail

/// Run the full trial protocol for one method at one (D_r, epsilon) cell:
/// per realization, train once on the shared training segment, then for each
/// interval reset the reservoir state, resynchronize over the xi-length
/// prefix, predict tau, and score the valid time. Knowledge-based prediction
/// has no random realization and contributes one trial per interval.
/// Realizations run on up to `jobs` threads; results are index-ordered and
/// independent of the schedule.
inline std::vector<TrialResult> run_trials(Method method, const HybridConfig& cfg,
                                           const TrialData& data, const EvalConfig& eval,
                                           std::uint64_t master_seed, int jobs = 1)
{
    cfg.validate();
    eval.validate();
    const ReservoirConfig& rc = cfg.reservoir;
    const detail::IntervalLayout lay(rc, eval);
    const long needed = lay.block_start(eval.intervals - 1) + lay.xi_steps + lay.tau_steps + 1;
    if (data.evaluation.count() < needed)
        throw std::invalid_argument("run_trials: evaluation segment too short for the protocol");

    if (method == Method::knowledge) {
        const std::uint64_t seed = trial_seed(master_seed, method, 0, cfg.epsilon, 0);
        KnowledgeModel model = cfg.make_model();
        std::vector<TrialResult> results;
        results.reserve(eval.intervals);
        for (int k = 0; k < eval.intervals; ++k)
            results.push_back(
                detail::run_knowledge_trial(model, data, eval, lay, k, seed, nullptr));
        return results;
    }

    const double limit = 1e3 * data.signal_rms;
    std::vector<TrialResult> results(std::size_t(eval.realizations) * eval.intervals);

    auto run_realization = [&](int ri) {
        const std::uint64_t seed = trial_seed(master_seed, method, rc.reservoir_dim, cfg.epsilon, ri);
        HybridConfig local = cfg;
        local.reservoir.seed = seed;

        if (method == Method::reservoir) {
            TrainedReservoir trained = train_reservoir(local.reservoir, data.training);
            ReservoirNet net = trained.net;
            for (int k = 0; k < eval.intervals; ++k) {
                const long p0 = lay.prediction_start(k);
                net.reset_state();
                resynchronize(net, data.evaluation.segment(lay.block_start(k), lay.xi_steps + 1));
                PredictResult pr = predict_closed_loop(net, trained.readout, lay.tau_steps,
                                                       rc.dt, 0.0, limit);
                TrialResult& out = results[std::size_t(ri) * eval.intervals + k];
                out.method = method;
                out.reservoir_dim = rc.reservoir_dim;
                out.epsilon = 0.0;
                out.realization_seed = seed;
                out.interval_index = k;
                detail::score_trial(data.evaluation, p0, pr.trajectory.samples, pr.diverged,
                                    data.signal_rms, eval, rc.dt, lay.tau_steps, out, nullptr);
            }
        } else {
            KnowledgeModel model = local.make_model();
            TrainedHybrid trained = train_hybrid(local, data.training);
            HybridNet net = trained.net;
            for (int k = 0; k < eval.intervals; ++k) {
                const long p0 = lay.prediction_start(k);
                net.reset_state();
                resynchronize_hybrid(net, model,
                                     data.evaluation.segment(lay.block_start(k), lay.xi_steps + 1));
                PredictResult pr =
                    predict_hybrid(net, model, trained.readout, lay.tau_steps, 0.0, limit);
                TrialResult& out = results[std::size_t(ri) * eval.intervals + k];
                out.method = method;
                out.reservoir_dim = rc.reservoir_dim;
                out.epsilon = cfg.epsilon;
                out.realization_seed = seed;
                out.interval_index = k;
                detail::score_trial(data.evaluation, p0, pr.trajectory.samples, pr.diverged,
                                    data.signal_rms, eval, rc.dt, lay.tau_steps, out, nullptr);
            }
        }
    };

    const int workers = std::clamp(jobs, 1, eval.realizations);
    if (workers == 1) {
        for (int ri = 0; ri < eval.realizations; ++ri) run_realization(ri);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int ri = next.fetch_add(1); ri < eval.realizations; ri = next.fetch_add(1)) {
                    try {
                        run_realization(ri);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    return results;
}

/// Re-run one specific trial deterministically, capturing its trajectories
/// and error series (used for representative-trial plots).
inline TrialResult replay_trial(Method method, const HybridConfig& cfg, const TrialData& data,
                                const EvalConfig& eval, std::uint64_t master_seed,
                                int realization, int interval, TrialCapture& capture)
{
    cfg.validate();
    const ReservoirConfig& rc = cfg.reservoir;
    const detail::IntervalLayout lay(rc, eval);
    const std::uint64_t seed =
        trial_seed(master_seed, method, method == Method::knowledge ? 0 : rc.reservoir_dim,
                   cfg.epsilon, realization);

    if (method == Method::knowledge) {
        KnowledgeModel model = cfg.make_model();
        return detail::run_knowledge_trial(model, data, eval, lay, interval, seed, &capture);
    }

    HybridConfig local = cfg;
    local.reservoir.seed = seed;
    const double limit = 1e3 * data.signal_rms;
    const long p0 = lay.prediction_start(interval);
    TrialResult out;
    out.method = method;
    out.reservoir_dim = rc.reservoir_dim;
    out.epsilon = method == Method::reservoir ? 0.0 : cfg.epsilon;
    out.realization_seed = seed;
    out.interval_index = interval;

    if (method == Method::reservoir) {
        TrainedReservoir trained = train_reservoir(local.reservoir, data.training);
        ReservoirNet net = trained.net;
        net.reset_state();
        resynchronize(net, data.evaluation.segment(lay.block_start(interval), lay.xi_steps + 1));
        PredictResult pr = predict_closed_loop(net, trained.readout, lay.tau_steps, rc.dt, 0.0, limit);
        detail::score_trial(data.evaluation, p0, pr.trajectory.samples, pr.diverged,
                            data.signal_rms, eval, rc.dt, lay.tau_steps, out, &capture);
    } else {
        KnowledgeModel model = local.make_model();
        TrainedHybrid trained = train_hybrid(local, data.training);
        HybridNet net = trained.net;
        net.reset_state();
        resynchronize_hybrid(net, model,
                             data.evaluation.segment(lay.block_start(interval), lay.xi_steps + 1));
        PredictResult pr = predict_hybrid(net, model, trained.readout, lay.tau_steps, 0.0, limit);
        detail::score_trial(data.evaluation, p0, pr.trajectory.samples, pr.diverged,
                            data.signal_rms, eval, rc.dt, lay.tau_steps, out, &capture);
    }
    return out;
}

}  // namespace hyfc
