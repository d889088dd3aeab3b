#pragma once

// System registry, ground-truth trajectory generation, and largest
// Lyapunov exponent estimation.

#include "hyfc/core.hpp"
#include "hyfc/ks.hpp"
#include "hyfc/lorenz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

namespace hyfc {

enum class SystemId { lorenz, ks };

/// One-step propagator u(t) -> u(t + dt) for a fixed dt and model error.
using StepFn = std::function<StateVector(const StateVector&)>;

/// Registry entry describing a forecastable system. A stepper built with
/// epsilon = 0 integrates the true equations; epsilon > 0 integrates the
/// perturbed model used by the knowledge-based predictor.
struct SystemSpec {
    SystemId id;
    std::string name;
    int dimension;
    double default_dt;
    double default_lyapunov;  // largest Lyapunov exponent used for unit conversion
    std::function<StepFn(double dt, double epsilon)> make_stepper;
};

inline const SystemSpec& system_spec(SystemId id)
{
    static const SystemSpec lorenz_spec{
        SystemId::lorenz,
        "lorenz",
        3,
        0.1,
        0.9056,  // from the divergence estimator below at long duration
        [](double dt, double epsilon) -> StepFn {
            LorenzParams p;
            p.b *= (1.0 + epsilon);
            return [p, dt](const StateVector& u) { return lorenz_step(u, p, dt); };
        },
    };
    static const SystemSpec ks_spec{
        SystemId::ks,
        "ks",
        64,
        0.25,
        0.07,
        [](double dt, double epsilon) -> StepFn {
            auto integrator = std::make_shared<KsEtdrk4>(KSParams{}, dt, epsilon);
            return [integrator](const StateVector& u) { return integrator->step(u); };
        },
    };
    switch (id) {
        case SystemId::lorenz: return lorenz_spec;
        case SystemId::ks: return ks_spec;
    }
    throw std::invalid_argument("system_spec: unknown system id");
}

inline std::string to_string(SystemId id) { return system_spec(id).name; }

inline SystemId parse_system(const std::string& name)
{
    if (name == "lorenz") return SystemId::lorenz;
    if (name == "ks") return SystemId::ks;
    throw std::invalid_argument("unknown system '" + name + "' (expected lorenz|ks)");
}

/// Default spin-up discarded before any trajectory is recorded, in time units.
inline constexpr double kDefaultSpinUp = 100.0;

/// Integrate from a seeded random initial condition, discard the spin-up
/// transient, and record floor(length/dt)+1 uniformly spaced samples.
inline Trajectory generate_trajectory(SystemId id, double length, double dt, double epsilon,
                                      std::uint64_t seed, double spin_up = kDefaultSpinUp)
{
    if (dt <= 0.0) throw std::invalid_argument("generate_trajectory: dt must be positive");
    if (length < dt) throw std::invalid_argument("generate_trajectory: length must be >= dt");
    const SystemSpec& spec = system_spec(id);
    StepFn step = spec.make_stepper(dt, epsilon);

    std::mt19937_64 rng(mix_seed(seed, 0x747261 /* "tra" */));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    StateVector u(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) u[i] = unit(rng);

    const auto spin_steps = static_cast<long>(std::llround(spin_up / dt));
    for (long s = 0; s < spin_steps; ++s) u = step(u);

    const auto n = static_cast<Eigen::Index>(std::floor(length / dt)) + 1;
    Eigen::MatrixXd samples(spec.dimension, n);
    samples.col(0) = u;
    for (Eigen::Index i = 1; i < n; ++i) {
        u = step(u);
        samples.col(i) = u;
    }
    return Trajectory(std::move(samples), dt, 0.0);
}

struct LyapunovOptions {
    double dt = 0.0;                 // 0 -> system default
    double delta0 = 1e-8;            // renormalized separation
    double renorm_interval = 1.0;    // time between renormalizations
    double spin_up = kDefaultSpinUp; // transient discarded before measuring
    std::uint64_t seed = 0;
};

/// Largest Lyapunov exponent of an arbitrary stepper by two-trajectory
/// divergence: a companion orbit is kept delta0 away, renormalized every
/// renorm_interval, and the exponent is the mean log stretch per unit time.
/// The first few cycles are discarded so the separation can rotate into the
/// leading direction.
inline double estimate_lyapunov(const StepFn& step, const StateVector& initial, double dt,
                                double duration, const LyapunovOptions& opt = {})
{
    if (dt <= 0.0) throw std::invalid_argument("estimate_lyapunov: dt must be positive");
    const long cycles = std::max<long>(1, std::lround(duration / opt.renorm_interval));
    const long steps_per_cycle =
        std::max<long>(1, std::lround(opt.renorm_interval / dt));
    const long discard = std::clamp<long>(cycles / 10, 1, 100);

    StateVector base = initial;
    const auto spin_steps = static_cast<long>(std::llround(opt.spin_up / dt));
    for (long s = 0; s < spin_steps; ++s) base = step(base);

    std::mt19937_64 rng(mix_seed(opt.seed, 0x6c796170 /* "lyap" */));
    std::normal_distribution<double> gauss(0.0, 1.0);
    StateVector dir(base.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(rng);
    dir.normalize();
    StateVector pert = base + opt.delta0 * dir;

    double log_sum = 0.0;
    long counted = 0;
    for (long cyc = 0; cyc < cycles; ++cyc) {
        for (long s = 0; s < steps_per_cycle; ++s) {
            base = step(base);
            pert = step(pert);
        }
        const double dist = (pert - base).norm();
        if (!(dist > 0.0)) throw std::runtime_error("estimate_lyapunov: separation collapsed to zero");
        if (cyc >= discard) {
            log_sum += std::log(dist / opt.delta0);
            ++counted;
        }
        pert = base + (opt.delta0 / dist) * (pert - base);
    }
    return log_sum / (counted * steps_per_cycle * dt);
}

/// Registry-backed overload for the built-in systems (true dynamics).
inline double estimate_lyapunov(SystemId id, double duration = 2000.0,
                                LyapunovOptions opt = {})
{
    const SystemSpec& spec = system_spec(id);
    const double dt = opt.dt > 0.0 ? opt.dt : spec.default_dt;
    StepFn step = spec.make_stepper(dt, 0.0);

    std::mt19937_64 rng(mix_seed(opt.seed, 0x696330 /* "ic0" */));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    StateVector u(spec.dimension);
    for (int i = 0; i < spec.dimension; ++i) u[i] = unit(rng);
    return estimate_lyapunov(step, u, dt, duration, opt);
}

}  // namespace hyfc
