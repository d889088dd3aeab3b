#pragma once

// Lorenz system vector field and fixed-step RK4 integration.

#include "hyfc/core.hpp"

#include <cmath>
#include <stdexcept>

namespace hyfc {

struct LorenzParams {
    double a = 10.0;
    double b = 28.0;
    double c = 8.0 / 3.0;
};

/// Magnitude bound beyond which a Lorenz integration is considered divergent.
inline constexpr double kLorenzBlowupLimit = 1e6;

/// Right-hand side of the Lorenz equations.
inline StateVector lorenz_derivative(const StateVector& state, const LorenzParams& p)
{
    if (state.size() != 3) throw std::invalid_argument("lorenz_derivative: state must be 3-dimensional");
    if (!all_finite(state)) throw std::domain_error("lorenz_derivative: non-finite state");
    const double x = state[0], y = state[1], z = state[2];
    StateVector d(3);
    d[0] = -p.a * x + p.a * y;
    d[1] = p.b * x - y - x * z;
    d[2] = -p.c * z + x * y;
    return d;
}

/// Advance the Lorenz state by dt with classical RK4 split into n_sub substeps.
inline StateVector lorenz_step(const StateVector& state, const LorenzParams& p, double dt,
                               int n_sub = 10)
{
    if (dt <= 0.0) throw std::invalid_argument("lorenz_step: dt must be positive");
    if (n_sub < 1) throw std::invalid_argument("lorenz_step: n_sub must be >= 1");
    const double h = dt / n_sub;
    StateVector u = state;
    for (int s = 0; s < n_sub; ++s) {
        const StateVector k1 = lorenz_derivative(u, p);
        const StateVector k2 = lorenz_derivative(u + 0.5 * h * k1, p);
        const StateVector k3 = lorenz_derivative(u + 0.5 * h * k2, p);
        const StateVector k4 = lorenz_derivative(u + h * k3, p);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (u.cwiseAbs().maxCoeff() > kLorenzBlowupLimit)
            throw IntegrationBlowup("lorenz_step: state exceeded blowup limit");
    }
    return u;
}

}  // namespace hyfc
