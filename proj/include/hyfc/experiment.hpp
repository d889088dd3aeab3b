#pragma once

// Sweep orchestration: expand the {method} x {D_r} x {epsilon} grid, run the
// trial protocol for every cell, and emit the trial CSV, summary CSV, figure
// SVGs, and a run manifest. Cells that cannot depend on an axis (knowledge on
// D_r, plain reservoir on epsilon) are computed once and shared.

#include "hyfc/evaluation.hpp"
#include "hyfc/svg.hpp"
#include "hyfc/systems.hpp"
#include "hyfc/trajectory_io.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace hyfc {

inline constexpr const char* kToolVersion = "0.1.0";

struct ExperimentConfig {
    SystemId system = SystemId::lorenz;
    std::vector<Method> methods = {Method::knowledge, Method::reservoir, Method::hybrid};
    std::vector<int> reservoir_dims = {500};
    std::vector<double> epsilons = {0.05};
    ReservoirConfig reservoir;  // shared dt/T/rho/sigma/... for every cell
    double gamma = 0.5;
    EvalConfig eval;
    std::uint64_t master_seed = 0;
    int jobs = 1;
    std::string out_dir = "out";

    void validate() const
    {
        if (methods.empty()) throw std::invalid_argument("ExperimentConfig: empty method list");
        if (reservoir_dims.empty()) throw std::invalid_argument("ExperimentConfig: empty D_r list");
        if (epsilons.empty()) throw std::invalid_argument("ExperimentConfig: empty epsilon list");
        reservoir.validate();
        eval.validate();
        if (gamma < 0.0 || gamma > 1.0)
            throw std::invalid_argument("ExperimentConfig: gamma must lie in [0, 1]");
        if (jobs < 1) throw std::invalid_argument("ExperimentConfig: jobs must be >= 1");
    }
};

/// Table defaults for each system; everything a sweep needs short of the
/// grid lists and the output directory.
inline ExperimentConfig default_experiment(SystemId system)
{
    ExperimentConfig cfg;
    cfg.system = system;
    cfg.reservoir.spectral_radius = 0.4;
    cfg.reservoir.avg_degree = 3.0;
    cfg.reservoir.ridge_beta = 1e-6;
    cfg.reservoir.resync_time = 10.0;
    cfg.gamma = 0.5;
    cfg.eval.threshold = 0.4;
    cfg.eval.interval_length = 250.0;
    cfg.eval.intervals = 20;
    cfg.eval.realizations = 32;
    cfg.eval.gap = 10.0;
    cfg.eval.lyapunov_rate = system_spec(system).default_lyapunov;
    switch (system) {
        case SystemId::lorenz:
            cfg.reservoir.input_scale = 0.15;
            cfg.reservoir.dt = 0.1;
            cfg.reservoir.train_time = 100.0;
            break;
        case SystemId::ks:
            cfg.reservoir.input_scale = 1.0;
            cfg.reservoir.dt = 0.25;
            cfg.reservoir.train_time = 5000.0;
            break;
    }
    return cfg;
}

namespace detail {

inline std::string format_g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

inline void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials)
{
    os << "method,D_r,epsilon,realization_seed,interval_index,t_v,t_v_lyapunov,censored\n";
    for (const auto& t : trials)
        os << to_string(t.method) << ',' << t.reservoir_dim << ',' << detail::format_g(t.epsilon)
           << ',' << t.realization_seed << ',' << t.interval_index << ','
           << detail::format_g(t.t_v) << ',' << detail::format_g(t.t_v_lyapunov) << ','
           << (t.censored ? 1 : 0) << "\n";
}

/// One computed sweep cell: canonical key plus its results and summary.
struct SweepCell {
    Method method = Method::knowledge;
    int reservoir_dim = 0;   // 0 when the method has no reservoir
    double epsilon = 0.0;    // 0 when the method has no knowledge model
    std::vector<TrialResult> trials;
    TrialSummary summary;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepOutcome {
    std::vector<SweepCell> cells;
    std::filesystem::path out_dir;
    int failed_cells = 0;
    bool ok() const { return failed_cells == 0; }
};

namespace detail {

struct CellKey {
    Method method;
    int dim;
    double eps;
    auto operator<=>(const CellKey&) const = default;
};

inline CellKey canonical_key(Method m, int dim, double eps)
{
    return CellKey{m, m == Method::knowledge ? 0 : dim, m == Method::reservoir ? 0.0 : eps};
}

inline std::string eps_tag(double eps)
{
    std::string s = format_g(eps);
    for (auto& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

}  // namespace detail

/// Run the whole sweep and write every artifact under cfg.out_dir.
inline SweepOutcome run_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();
    const auto wall_start = std::chrono::system_clock::now();

    SweepOutcome outcome;
    outcome.out_dir = fs::path(cfg.out_dir);
    fs::create_directories(outcome.out_dir);

    const std::uint64_t data_seed = mix_seed(cfg.master_seed, 0x64617461 /* "data" */);
    const TrialData data = make_trial_data(cfg.system, cfg.reservoir, cfg.eval, data_seed);

    std::map<detail::CellKey, std::size_t> computed;
    for (Method method : cfg.methods)
        for (int dim : cfg.reservoir_dims)
            for (double eps : cfg.epsilons) {
                const auto key = detail::canonical_key(method, dim, eps);
                if (computed.count(key)) continue;
                computed[key] = outcome.cells.size();

                SweepCell cell;
                cell.method = method;
                cell.reservoir_dim = key.dim;
                cell.epsilon = key.eps;
                HybridConfig hc;
                hc.system = cfg.system;
                hc.epsilon = key.eps;
                hc.gamma = cfg.gamma;
                hc.reservoir = cfg.reservoir;
                hc.reservoir.reservoir_dim = std::max(key.dim, 1);

                const auto c0 = std::chrono::steady_clock::now();
                try {
                    cell.trials = run_trials(method, hc, data, cfg.eval, cfg.master_seed, cfg.jobs);
                    if (cell.trials.empty()) throw std::runtime_error("cell produced zero trials");
                    cell.summary = summarize(cell.trials, cfg.eval.lyapunov_rate);
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                    ++outcome.failed_cells;
                }
                cell.seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
                outcome.cells.push_back(std::move(cell));
            }

    auto find_cell = [&](Method m, int dim, double eps) -> const SweepCell* {
        const auto it = computed.find(detail::canonical_key(m, dim, eps));
        if (it == computed.end()) return nullptr;
        const SweepCell& c = outcome.cells[it->second];
        return c.failed ? nullptr : &c;
    };

    {
        std::ofstream os(outcome.out_dir / "trials.csv");
        std::vector<TrialResult> all;
        for (const auto& cell : outcome.cells)
            all.insert(all.end(), cell.trials.begin(), cell.trials.end());
        write_trials_csv(os, all);
    }
    {
        std::ofstream os(outcome.out_dir / "summary.csv");
        os << "method,D_r,epsilon,trials,censored,t_v_median,t_v_q1,t_v_q3,"
              "lyap_median,lyap_q1,lyap_q3\n";
        for (const auto& cell : outcome.cells) {
            if (cell.failed) continue;
            const auto& s = cell.summary;
            os << to_string(cell.method) << ',' << cell.reservoir_dim << ','
               << detail::format_g(cell.epsilon) << ',' << s.trials << ',' << s.censored << ','
               << detail::format_g(s.median_tv) << ',' << detail::format_g(s.q1_tv) << ','
               << detail::format_g(s.q3_tv) << ',' << detail::format_g(s.median) << ','
               << detail::format_g(s.q1) << ',' << detail::format_g(s.q3) << "\n";
        }
    }

    const char* method_color[] = {"#1f77b4", "#000000", "#d62728"};  // knowledge, reservoir, hybrid

    // Valid time vs reservoir size, one figure per epsilon.
    if (cfg.reservoir_dims.size() >= 1)
        for (double eps : cfg.epsilons) {
            std::vector<svg::QuartileSeries> series;
            for (Method m : cfg.methods) {
                svg::QuartileSeries s;
                s.label = to_string(m);
                s.color = method_color[static_cast<int>(m)];
                for (int dim : cfg.reservoir_dims)
                    if (const SweepCell* c = find_cell(m, dim, eps))
                        s.points.push_back({double(dim), c->summary.median, c->summary.q1, c->summary.q3});
                if (!s.points.empty()) series.push_back(std::move(s));
            }
            if (!series.empty())
                svg::write_quartile_plot(
                    (outcome.out_dir / ("valid_time_vs_dr_eps" + detail::eps_tag(eps) + ".svg"))
                        .string(),
                    to_string(cfg.system) + ": median valid time, epsilon=" + detail::format_g(eps),
                    "reservoir size D_r", "valid time (Lyapunov units)", series);
        }

    // Valid time vs epsilon, one figure per reservoir size.
    if (cfg.epsilons.size() >= 1)
        for (int dim : cfg.reservoir_dims) {
            std::vector<svg::QuartileSeries> series;
            for (Method m : cfg.methods) {
                svg::QuartileSeries s;
                s.label = to_string(m);
                s.color = method_color[static_cast<int>(m)];
                for (double eps : cfg.epsilons)
                    if (const SweepCell* c = find_cell(m, dim, eps))
                        s.points.push_back({eps, c->summary.median, c->summary.q1, c->summary.q3});
                if (!s.points.empty()) series.push_back(std::move(s));
            }
            if (!series.empty())
                svg::write_quartile_plot(
                    (outcome.out_dir / ("valid_time_vs_epsilon_dr" + std::to_string(dim) + ".svg"))
                        .string(),
                    to_string(cfg.system) + ": median valid time, D_r=" + std::to_string(dim),
                    "model error epsilon", "valid time (Lyapunov units)", series);
        }

    // Representative-trial views: the trial whose t_v sits closest to the
    // cell median, replayed deterministically with trajectory capture.
    const int plot_dim = *std::max_element(cfg.reservoir_dims.begin(), cfg.reservoir_dims.end());
    const double plot_eps = cfg.epsilons.front();
    for (Method m : cfg.methods) {
        const SweepCell* cell = find_cell(m, plot_dim, plot_eps);
        if (!cell) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < cell->trials.size(); ++i)
            if (std::abs(cell->trials[i].t_v - cell->summary.median_tv) <
                std::abs(cell->trials[best].t_v - cell->summary.median_tv))
                best = i;
        const int realization = int(best) / cfg.eval.intervals;
        const int interval = int(best) % cfg.eval.intervals;

        HybridConfig hc;
        hc.system = cfg.system;
        hc.epsilon = cell->epsilon;
        hc.gamma = cfg.gamma;
        hc.reservoir = cfg.reservoir;
        hc.reservoir.reservoir_dim = std::max(cell->reservoir_dim, 1);
        TrialCapture capture;
        replay_trial(m, hc, data, cfg.eval, cfg.master_seed, realization, interval, capture);

        const double lam = cfg.eval.lyapunov_rate;
        std::vector<double> times(capture.error_series.size());
        for (std::size_t i = 0; i < times.size(); ++i) times[i] = lam * capture.dt * double(i + 1);
        if (m == Method::hybrid || cfg.methods.size() == 1)
            svg::write_error_curve(
                (outcome.out_dir / ("error_curve_" + to_string(m) + ".svg")).string(),
                to_string(cfg.system) + " " + to_string(m) + ": representative trial error",
                "lambda_max t", times, capture.error_series, cfg.eval.threshold);

        if (cfg.system == SystemId::ks) {
            const auto n = capture.predicted.cols();
            Eigen::MatrixXd err_field = capture.predicted - capture.truth.leftCols(n);
            const double L = KSParams{}.length;
            svg::write_heatmap(
                (outcome.out_dir / ("heatmap_" + to_string(m) + ".svg")).string(),
                "ks " + to_string(m) + ": prediction error field", "lambda_max t", "x",
                err_field, lam * capture.dt, lam * capture.dt, L / err_field.rows(),
                L / err_field.rows());
            if (m == cfg.methods.front())
                svg::write_heatmap((outcome.out_dir / "heatmap_truth.svg").string(),
                                   "ks: true field", "lambda_max t", "x", capture.truth,
                                   lam * capture.dt, lam * capture.dt, L / capture.truth.rows(),
                                   L / capture.truth.rows());
        }
    }

    // Run manifest: configuration, timing, and per-cell status.
    {
        nlohmann::json j;
        j["tool_version"] = kToolVersion;
        j["system"] = to_string(cfg.system);
        j["master_seed"] = cfg.master_seed;
        j["jobs"] = cfg.jobs;
        j["reservoir"] = {{"spectral_radius", cfg.reservoir.spectral_radius},
                          {"avg_degree", cfg.reservoir.avg_degree},
                          {"input_scale", cfg.reservoir.input_scale},
                          {"dt", cfg.reservoir.dt},
                          {"train_time", cfg.reservoir.train_time},
                          {"ridge_beta", cfg.reservoir.ridge_beta},
                          {"resync_time", cfg.reservoir.resync_time}};
        j["gamma"] = cfg.gamma;
        j["eval"] = {{"threshold", cfg.eval.threshold},
                     {"interval_length", cfg.eval.interval_length},
                     {"intervals", cfg.eval.intervals},
                     {"realizations", cfg.eval.realizations},
                     {"lyapunov_rate", cfg.eval.lyapunov_rate},
                     {"gap", cfg.eval.gap}};
        j["reservoir_dims"] = cfg.reservoir_dims;
        j["epsilons"] = cfg.epsilons;
        {
            std::vector<std::string> names;
            for (Method m : cfg.methods) names.push_back(to_string(m));
            j["methods"] = names;
        }
        j["started_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(wall_start.time_since_epoch()).count();
        j["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        j["failed_cells"] = outcome.failed_cells;
        auto& cells = j["cells"] = nlohmann::json::array();
        for (const auto& cell : outcome.cells) {
            nlohmann::json c;
            c["method"] = to_string(cell.method);
            c["D_r"] = cell.reservoir_dim;
            c["epsilon"] = cell.epsilon;
            c["seconds"] = cell.seconds;
            if (cell.failed) {
                c["status"] = "failed";
                c["error"] = cell.error;
            } else {
                c["status"] = "ok";
                c["trials"] = cell.summary.trials;
                c["censored"] = cell.summary.censored;
                c["lyap_median"] = cell.summary.median;
                c["lyap_q1"] = cell.summary.q1;
                c["lyap_q3"] = cell.summary.q3;
            }
            cells.push_back(std::move(c));
        }
        std::ofstream os(outcome.out_dir / "manifest.json");
        os << j.dump(2) << "\n";
    }

    return outcome;
}

}  // namespace hyfc
