#pragma once

// Command-line front end: generate / train / predict / evaluate / sweep.
// Kept in a header (thin main in tools/) so the argument wiring is testable.

#include "hyfc/artifact_io.hpp"
#include "hyfc/evaluation.hpp"
#include "hyfc/experiment.hpp"
#include "hyfc/systems.hpp"
#include "hyfc/trajectory_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace hyfc::cli {

namespace detail {

inline void check_dt(double file_dt, double cfg_dt, const std::string& what)
{
    if (std::abs(file_dt - cfg_dt) > 1e-12 * std::max(1.0, cfg_dt))
        throw std::runtime_error(what + ": sampling interval " + std::to_string(file_dt) +
                                 " does not match model dt " + std::to_string(cfg_dt));
}

struct GenerateArgs {
    std::string system;
    double length = 0.0;
    std::optional<double> dt;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double spin_up = kDefaultSpinUp;
    std::string out;
};

inline int cmd_generate(const GenerateArgs& a)
{
    const SystemId id = parse_system(a.system);
    const double dt = a.dt.value_or(system_spec(id).default_dt);
    Trajectory t = generate_trajectory(id, a.length, dt, a.epsilon, a.seed, a.spin_up);
    save_trajectory(a.out, t, a.system, a.seed, a.epsilon);
    std::cout << "wrote " << t.count() << " samples of dimension " << t.dim() << " to " << a.out
              << "\n";
    return 0;
}

struct TrainArgs {
    std::string data;
    std::string method;
    std::string out;
    std::optional<int> reservoir_dim;
    std::optional<double> rho, sigma, avg_degree, gamma, beta, xi, epsilon;
    std::uint64_t seed = 0;
};

inline int cmd_train(const TrainArgs& a)
{
    const Method method = parse_method(a.method);
    if (method == Method::knowledge)
        throw std::runtime_error("train: the knowledge model has no trainable parameters");

    TrajectoryFile file = load_trajectory(a.data);
    const SystemId system = parse_system(file.system);
    ExperimentConfig defaults = default_experiment(system);

    ReservoirConfig rc = defaults.reservoir;
    rc.dt = file.trajectory.dt;
    rc.reservoir_dim = a.reservoir_dim.value_or(rc.reservoir_dim);
    rc.spectral_radius = a.rho.value_or(rc.spectral_radius);
    rc.input_scale = a.sigma.value_or(rc.input_scale);
    rc.avg_degree = a.avg_degree.value_or(rc.avg_degree);
    rc.ridge_beta = a.beta.value_or(rc.ridge_beta);
    rc.resync_time = a.xi.value_or(rc.resync_time);
    rc.seed = a.seed;
    rc.train_time =
        std::max(rc.dt, file.trajectory.duration() - rc.resync_time);  // washout prefix excluded

    ModelArtifact artifact;
    artifact.system = system;
    artifact.config = rc;
    artifact.signal_rms = signal_rms(file.trajectory);
    double in_sample = 0.0;
    if (method == Method::reservoir) {
        TrainedReservoir trained = train_reservoir(rc, file.trajectory);
        artifact.kind = ModelArtifact::Kind::reservoir;
        artifact.readout = std::move(trained.readout);
        artifact.adjacency = std::move(trained.net.adjacency);
        artifact.input_weights = std::move(trained.net.input_weights);
        in_sample = trained.training_rms;
    } else {
        HybridConfig hc;
        hc.reservoir = rc;
        hc.system = system;
        hc.gamma = a.gamma.value_or(defaults.gamma);
        hc.epsilon = a.epsilon.value_or(0.0);
        TrainedHybrid trained = train_hybrid(hc, file.trajectory);
        artifact.kind = ModelArtifact::Kind::hybrid;
        artifact.gamma = hc.gamma;
        artifact.epsilon = hc.epsilon;
        artifact.readout = std::move(trained.readout);
        artifact.adjacency = std::move(trained.net.adjacency);
        artifact.input_weights = std::move(trained.net.input_weights);
        in_sample = trained.training_rms;
    }
    save_model(a.out, artifact);
    std::cout << "trained " << a.method << " model (D_r=" << rc.reservoir_dim
              << ", in-sample rms " << in_sample << ", signal rms " << artifact.signal_rms
              << ") -> " << a.out << "\n";
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string data;
    std::string out;
    std::optional<long> steps;
    std::optional<double> tau, xi;
};

inline int cmd_predict(const PredictArgs& a)
{
    ModelArtifact artifact = load_model(a.model);
    TrajectoryFile file = load_trajectory(a.data);
    check_dt(file.trajectory.dt, artifact.config.dt, "predict");

    const double dt = artifact.config.dt;
    const double xi = a.xi.value_or(artifact.config.resync_time);
    const long resync_steps = std::lround(xi / dt);
    if (file.trajectory.count() < resync_steps + 1)
        throw std::runtime_error("predict: data holds fewer samples than the resync prefix");
    if (!a.steps && !a.tau) throw std::runtime_error("predict: give --steps or --tau");
    const long steps = a.steps.value_or(std::lround(a.tau.value_or(0.0) / dt));
    const double limit = 1e3 * artifact.signal_rms;
    const Trajectory prefix = file.trajectory.segment(0, resync_steps + 1);

    PredictResult pr;
    if (artifact.kind == ModelArtifact::Kind::reservoir) {
        ReservoirNet net = artifact.to_reservoir_net();
        resynchronize(net, prefix);
        pr = predict_closed_loop(net, artifact.readout, steps, dt, prefix.time_at(resync_steps),
                                 limit);
    } else {
        HybridNet net = artifact.to_hybrid_net();
        KnowledgeModel model(artifact.system, artifact.epsilon, dt);
        resynchronize_hybrid(net, model, prefix);
        pr = predict_hybrid(net, model, artifact.readout, steps, prefix.time_at(resync_steps),
                            limit);
    }

    save_trajectory(a.out, pr.trajectory, to_string(artifact.system), artifact.config.seed,
                    artifact.epsilon);
    std::cout << "predicted " << pr.trajectory.count() << " samples"
              << (pr.diverged ? " (diverged, truncated)" : "") << " -> " << a.out << "\n";
    return pr.diverged ? 2 : 0;
}

struct EvaluateArgs {
    std::string pred, truth, eseries, train;
    std::optional<double> denom, f, lambda, dt;
    long offset = 0;
    std::string out;
};

inline int cmd_evaluate(const EvaluateArgs& a)
{
    const double f = a.f.value_or(0.4);
    std::vector<double> errors;
    double dt = a.dt.value_or(0.0);
    double lambda = a.lambda.value_or(0.0);

    if (!a.eseries.empty()) {
        std::ifstream is(a.eseries);
        if (!is) throw std::runtime_error("cannot open E-series file '" + a.eseries + "'");
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            errors.push_back(std::stod(line));
        }
        if (dt <= 0.0) dt = 1.0;
    } else {
        if (a.pred.empty() || a.truth.empty())
            throw std::runtime_error("evaluate: give --pred and --truth, or --eseries");
        TrajectoryFile pred = load_trajectory(a.pred);
        TrajectoryFile truth = load_trajectory(a.truth);
        check_dt(pred.trajectory.dt, truth.trajectory.dt, "evaluate");
        if (dt <= 0.0) dt = pred.trajectory.dt;

        double denom = 0.0;
        if (a.denom) denom = *a.denom;
        else if (!a.train.empty()) denom = signal_rms(load_trajectory(a.train).trajectory);
        else throw std::runtime_error("evaluate: give --denom or --train for the error scale");

        if (a.offset < 0 || a.offset + pred.trajectory.count() > truth.trajectory.count())
            throw std::runtime_error("evaluate: truth does not cover the prediction window");
        errors.reserve(pred.trajectory.count());
        for (Eigen::Index i = 0; i < pred.trajectory.count(); ++i)
            errors.push_back(normalized_error(truth.trajectory.sample(a.offset + i),
                                              pred.trajectory.sample(i), denom));
        if (lambda <= 0.0) {
            try {
                lambda = system_spec(parse_system(pred.system)).default_lyapunov;
            } catch (const std::invalid_argument&) {
                lambda = 0.0;
            }
        }
    }
    if (errors.empty()) throw std::runtime_error("evaluate: empty error series");

    const ValidTime vt = valid_time(errors, f, dt);
    std::cout << "t_v=" << vt.t_v << " t_v_lyapunov=" << vt.t_v * lambda
              << " censored=" << (vt.censored ? 1 : 0) << "\n";
    if (!a.out.empty()) {
        std::ofstream os(a.out);
        if (!os) throw std::runtime_error("cannot open '" + a.out + "' for writing");
        os << "t,E\n";
        for (std::size_t i = 0; i < errors.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", double(i + 1) * dt, errors[i]);
            os << buf;
        }
    }
    return 0;
}

struct SweepArgs {
    std::string system = "lorenz";
    std::vector<std::string> methods;
    std::vector<int> dims;
    std::vector<double> epsilons;
    std::optional<double> rho, sigma, avg_degree, gamma, beta, train_time, dt;
    std::optional<double> tau, xi, f, lambda, gap;
    std::optional<int> realizations, intervals;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out = "out";
};

inline ExperimentConfig to_experiment_config(const SweepArgs& a)
{
    ExperimentConfig cfg = default_experiment(parse_system(a.system));
    if (!a.methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    }
    if (!a.dims.empty()) cfg.reservoir_dims = a.dims;
    if (!a.epsilons.empty()) cfg.epsilons = a.epsilons;
    cfg.reservoir.spectral_radius = a.rho.value_or(cfg.reservoir.spectral_radius);
    cfg.reservoir.input_scale = a.sigma.value_or(cfg.reservoir.input_scale);
    cfg.reservoir.avg_degree = a.avg_degree.value_or(cfg.reservoir.avg_degree);
    cfg.reservoir.ridge_beta = a.beta.value_or(cfg.reservoir.ridge_beta);
    cfg.reservoir.train_time = a.train_time.value_or(cfg.reservoir.train_time);
    cfg.reservoir.dt = a.dt.value_or(cfg.reservoir.dt);
    cfg.reservoir.resync_time = a.xi.value_or(cfg.reservoir.resync_time);
    cfg.gamma = a.gamma.value_or(cfg.gamma);
    cfg.eval.interval_length = a.tau.value_or(cfg.eval.interval_length);
    cfg.eval.threshold = a.f.value_or(cfg.eval.threshold);
    cfg.eval.lyapunov_rate = a.lambda.value_or(cfg.eval.lyapunov_rate);
    cfg.eval.gap = a.gap.value_or(cfg.eval.gap);
    cfg.eval.realizations = a.realizations.value_or(cfg.eval.realizations);
    cfg.eval.intervals = a.intervals.value_or(cfg.eval.intervals);
    cfg.master_seed = a.seed;
    cfg.jobs = a.jobs;
    cfg.out_dir = a.out;
    return cfg;
}

inline int cmd_sweep(const SweepArgs& a)
{
    const ExperimentConfig cfg = to_experiment_config(a);
    SweepOutcome outcome = run_sweep(cfg);
    for (const auto& cell : outcome.cells) {
        std::printf("%-10s D_r=%-5d eps=%-6g ", to_string(cell.method).c_str(),
                    cell.reservoir_dim, cell.epsilon);
        if (cell.failed)
            std::printf("FAILED: %s\n", cell.error.c_str());
        else
            std::printf("median %.3f [%.3f, %.3f] lyap units, %ld trials (%.1fs)\n",
                        cell.summary.median, cell.summary.q1, cell.summary.q3,
                        cell.summary.trials, cell.seconds);
    }
    std::cout << "artifacts in " << outcome.out_dir.string() << "\n";
    return outcome.ok() ? 0 : 1;
}

}  // namespace detail

/// Build the CLI and execute one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv)
{
    CLI::App app{"hybrid knowledge-based + reservoir forecasting for chaotic systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    detail::GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "integrate a system and write a trajectory CSV");
    generate->add_option("--system", gen.system, "system id (lorenz|ks)")
        ->required()
        ->check(CLI::IsMember({"lorenz", "ks"}));
    generate->add_option("--length", gen.length, "trajectory duration in time units")->required();
    generate->add_option("--dt", gen.dt, "sampling interval (default: per system)");
    generate->add_option("--epsilon", gen.epsilon, "model error (0 = true system)");
    generate->add_option("--seed", gen.seed, "random seed for the initial condition");
    generate->add_option("--spin-up", gen.spin_up, "discarded transient in time units");
    generate->add_option("--out", gen.out, "output CSV path")->required();

    detail::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "fit a readout on a trajectory, save the model");
    train_cmd->add_option("--data", train.data, "training trajectory CSV")->required();
    train_cmd->add_option("--method", train.method, "reservoir|hybrid")
        ->required()
        ->check(CLI::IsMember({"reservoir", "hybrid"}));
    train_cmd->add_option("--dr", train.reservoir_dim, "reservoir size D_r");
    train_cmd->add_option("--rho", train.rho, "adjacency spectral radius");
    train_cmd->add_option("--sigma", train.sigma, "input weight scale");
    train_cmd->add_option("--avg-degree", train.avg_degree, "mean reservoir degree");
    train_cmd->add_option("--gamma", train.gamma, "fraction of nodes fed the raw input (hybrid)");
    train_cmd->add_option("--beta", train.beta, "ridge regularization");
    train_cmd->add_option("--xi", train.xi, "washout/resync duration");
    train_cmd->add_option("--epsilon", train.epsilon, "knowledge-model error (hybrid)");
    train_cmd->add_option("--seed", train.seed, "network realization seed");
    train_cmd->add_option("--out", train.out, "output model path")->required();

    detail::PredictArgs pred;
    auto* predict = app.add_subcommand("predict", "resynchronize a stored model and forecast");
    predict->add_option("--model", pred.model, "model artifact from `train`")->required();
    predict->add_option("--data", pred.data, "recent true data; the resync prefix is used")
        ->required();
    predict->add_option("--steps", pred.steps, "forecast steps");
    predict->add_option("--tau", pred.tau, "forecast duration (alternative to --steps)");
    predict->add_option("--xi", pred.xi, "resync duration override");
    predict->add_option("--out", pred.out, "output trajectory CSV")->required();

    detail::EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a prediction's valid time");
    evaluate->add_option("--pred", ev.pred, "predicted trajectory CSV");
    evaluate->add_option("--truth", ev.truth, "true trajectory CSV");
    evaluate->add_option("--offset", ev.offset, "truth row aligned with the first predicted row");
    evaluate->add_option("--denom", ev.denom, "normalization (training RMS)");
    evaluate->add_option("--train", ev.train, "training CSV to compute the normalization from");
    evaluate->add_option("--eseries", ev.eseries, "precomputed error series file (one E per line)");
    evaluate->add_option("--dt", ev.dt, "time step of the series");
    evaluate->add_option("--f", ev.f, "error threshold");
    evaluate->add_option("--lambda", ev.lambda, "Lyapunov rate for unit conversion");
    evaluate->add_option("--out", ev.out, "write the error series CSV here");

    detail::SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "full trial protocol over {method} x {D_r} x {epsilon}");
    sweep->set_config("--config", "", "read options from an INI/TOML-style file");
    sweep->allow_config_extras(CLI::config_extras_mode::error);
    sweep->add_option("--system", sw.system, "system id (lorenz|ks)")
        ->check(CLI::IsMember({"lorenz", "ks"}));
    sweep->add_option("--methods", sw.methods, "subset of knowledge|reservoir|hybrid")
        ->check(CLI::IsMember({"knowledge", "reservoir", "hybrid"}));
    sweep->add_option("--dr", sw.dims, "reservoir sizes to sweep");
    sweep->add_option("--epsilon", sw.epsilons, "model errors to sweep");
    sweep->add_option("--rho", sw.rho, "adjacency spectral radius");
    sweep->add_option("--sigma", sw.sigma, "input weight scale (default per system)");
    sweep->add_option("--avg-degree", sw.avg_degree, "mean reservoir degree");
    sweep->add_option("--gamma", sw.gamma, "hybrid raw-input node fraction");
    sweep->add_option("--beta", sw.beta, "ridge regularization");
    sweep->add_option("--train-time", sw.train_time, "training duration T (default per system)");
    sweep->add_option("--dt", sw.dt, "sampling interval (default per system)");
    sweep->add_option("--tau", sw.tau, "prediction interval length");
    sweep->add_option("--xi", sw.xi, "resynchronization duration");
    sweep->add_option("--f", sw.f, "valid-time error threshold");
    sweep->add_option("--lambda", sw.lambda, "Lyapunov rate for unit conversion");
    sweep->add_option("--gap", sw.gap, "spacing between prediction intervals");
    sweep->add_option("--realizations", sw.realizations, "random network realizations per cell");
    sweep->add_option("--intervals", sw.intervals, "prediction intervals per realization");
    sweep->add_option("--seed", sw.seed, "master seed");
    sweep->add_option("--jobs", sw.jobs, "parallel trial jobs");
    sweep->add_option("--out", sw.out, "output directory")->envname("HYFC_OUT");

    try {
        app.parse(argc, argv);
        if (generate->parsed()) return detail::cmd_generate(gen);
        if (train_cmd->parsed()) return detail::cmd_train(train);
        if (predict->parsed()) return detail::cmd_predict(pred);
        if (evaluate->parsed()) return detail::cmd_evaluate(ev);
        if (sweep->parsed()) return detail::cmd_sweep(sw);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hyfc::cli
