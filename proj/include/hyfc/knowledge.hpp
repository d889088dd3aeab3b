#pragma once

// Imperfect knowledge-based one-step predictor: the true equations with an
// epsilon perturbation, integrated with the same scheme quality as the
// ground truth so the model error is attributable to epsilon alone.

#include "hyfc/core.hpp"
#include "hyfc/systems.hpp"

#include <stdexcept>
#include <utility>

namespace hyfc {

class KnowledgeModel {
public:
    KnowledgeModel(SystemId system, double epsilon, double dt)
        : system_(system), epsilon_(epsilon), dt_(dt)
    {
        if (epsilon < 0.0) throw std::invalid_argument("KnowledgeModel: epsilon must be >= 0");
        if (dt <= 0.0) throw std::invalid_argument("KnowledgeModel: dt must be positive");
        step_ = system_spec(system).make_stepper(dt, epsilon);
    }

    SystemId system() const { return system_; }
    double epsilon() const { return epsilon_; }
    double dt() const { return dt_; }
    int dimension() const { return system_spec(system_).dimension; }

    /// One dt-step of the perturbed model.
    StateVector step(const StateVector& u) const
    {
        if (u.size() != dimension())
            throw std::invalid_argument("KnowledgeModel::step: state dimension mismatch");
        return step_(u);
    }

private:
    SystemId system_;
    double epsilon_;
    double dt_;
    StepFn step_;
};

inline StateVector k_step(const KnowledgeModel& model, const StateVector& u)
{
    return model.step(u);
}

/// Knowledge-only forecast: iterate the perturbed model from u0. The result
/// holds u0 followed by `steps` forecast samples.
inline Trajectory k_forecast(const KnowledgeModel& model, const StateVector& u0, long steps,
                             double t0 = 0.0)
{
    if (steps < 0) throw std::invalid_argument("k_forecast: steps must be >= 0");
    Eigen::MatrixXd samples(u0.size(), steps + 1);
    samples.col(0) = u0;
    StateVector u = u0;
    for (long i = 1; i <= steps; ++i) {
        u = model.step(u);
        samples.col(i) = u;
    }
    return Trajectory(std::move(samples), model.dt(), t0);
}

}  // namespace hyfc
