#pragma once

// Kuramoto-Sivashinsky integration: Fourier collocation in space with
// fourth-order exponential time differencing (ETDRK4) in time.
//
//   y_t = -y y_x - (1 + epsilon) y_xx - y_xxxx,   y(x + L, t) = y(x, t)
//
// epsilon = 0 is the true system; epsilon > 0 is the perturbed model used
// as an imperfect predictor.

#include "hyfc/core.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hyfc {

struct KSParams {
    double length = 35.0;  // spatial period L
    int grid_points = 64;  // Q, even
    bool dealias = false;  // 2/3-rule truncation of the quadratic term

    double dx() const { return length / grid_points; }

    void validate() const
    {
        if (grid_points < 16 || grid_points % 2 != 0)
            throw std::invalid_argument("KSParams: grid_points must be even and >= 16");
        if (length <= 0.0) throw std::invalid_argument("KSParams: length must be positive");
    }
};

/// Sup-norm bound beyond which a KS integration is considered divergent.
inline constexpr double kKsBlowupLimit = 1e3;

/// One-step ETDRK4 propagator for the (possibly perturbed) KS equation.
///
/// The linear factors exp(h L) and the phi-function weights are fixed at
/// construction, so stepping costs four FFT round trips. The coefficient
/// weights are evaluated by the usual mean over a contour around each
/// eigenvalue of the linear operator, which stays accurate where h*L
/// approaches zero.
class KsEtdrk4 {
public:
    KsEtdrk4(const KSParams& params, double dt, double epsilon = 0.0)
        : params_(params), dt_(dt), epsilon_(epsilon)
    {
        params_.validate();
        if (dt <= 0.0) throw std::invalid_argument("KsEtdrk4: dt must be positive");
        const int q = params_.grid_points;
        const int nk = q / 2 + 1;  // half spectrum of a real field

        using cd = std::complex<double>;
        wave_.resize(nk);
        for (int n = 0; n < nk; ++n) wave_[n] = 2.0 * std::numbers::pi * n / params_.length;

        Eigen::VectorXd lin(nk);
        for (int n = 0; n < nk; ++n) {
            const double k2 = wave_[n] * wave_[n];
            lin[n] = (1.0 + epsilon) * k2 - k2 * k2;
        }

        e_full_.resize(nk);
        e_half_.resize(nk);
        q_.resize(nk);
        f1_.resize(nk);
        f2_.resize(nk);
        f3_.resize(nk);
        const int m = 32;  // contour points
        for (int n = 0; n < nk; ++n) {
            const double hl = dt * lin[n];
            e_full_[n] = std::exp(hl);
            e_half_[n] = std::exp(0.5 * hl);
            cd sq = 0, s1 = 0, s2 = 0, s3 = 0;
            for (int j = 0; j < m; ++j) {
                const cd r = std::polar(1.0, std::numbers::pi * (j + 0.5) / m);
                const cd z = hl + r;
                const cd ez = std::exp(z);
                const cd z3 = z * z * z;
                sq += (std::exp(0.5 * z) - 1.0) / z;
                s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                s2 += (2.0 + z + ez * (-2.0 + z)) / z3;
                s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            q_[n] = dt * (sq / double(m)).real();
            f1_[n] = dt * (s1 / double(m)).real();
            f2_[n] = dt * (s2 / double(m)).real();
            f3_[n] = dt * (s3 / double(m)).real();
        }

        // Spectral derivative weight of the quadratic term, -(i k / 2).
        // The Nyquist mode carries no usable derivative and is zeroed.
        g_.resize(nk);
        for (int n = 0; n < nk; ++n) g_[n] = cd(0.0, -0.5 * wave_[n]);
        g_[nk - 1] = 0.0;
        if (params_.dealias) {
            for (int n = 0; n < nk; ++n)
                if (3 * n > q) g_[n] = 0.0;
        }

        fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
        phys_.resize(q);
        spec_.resize(nk);
    }

    const KSParams& params() const { return params_; }
    double dt() const { return dt_; }
    double epsilon() const { return epsilon_; }

    /// Advance the grid values by one dt. Throws IntegrationBlowup if the
    /// result leaves the admissible sup-norm ball.
    StateVector step(const StateVector& y)
    {
        const int q = params_.grid_points;
        if (y.size() != q) throw std::invalid_argument("KsEtdrk4::step: state dimension mismatch");
        using CVec = Eigen::VectorXcd;

        CVec v = forward(y);
        CVec nv = nonlinear(v);
        CVec a = e_half_.cwiseProduct(v) + q_.cwiseProduct(nv);
        CVec na = nonlinear(a);
        CVec b = e_half_.cwiseProduct(v) + q_.cwiseProduct(na);
        CVec nb = nonlinear(b);
        CVec c = e_half_.cwiseProduct(a) + q_.cwiseProduct(2.0 * nb - nv);
        CVec nc = nonlinear(c);

        CVec vn = e_full_.cwiseProduct(v) + f1_.cwiseProduct(nv) +
                  2.0 * f2_.cwiseProduct(na + nb) + f3_.cwiseProduct(nc);
        StateVector out = inverse(vn);
        if (!out.allFinite() || out.cwiseAbs().maxCoeff() > kKsBlowupLimit)
            throw IntegrationBlowup("KsEtdrk4::step: sup-norm exceeded blowup limit");
        return out;
    }

private:
    Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& y)
    {
        phys_.assign(y.data(), y.data() + y.size());
        fft_.fwd(spec_, phys_);
        return Eigen::Map<const Eigen::VectorXcd>(spec_.data(), spec_.size());
    }

    Eigen::VectorXd inverse(const Eigen::VectorXcd& v)
    {
        spec_.assign(v.data(), v.data() + v.size());
        fft_.inv(phys_, spec_, params_.grid_points);
        return Eigen::Map<const Eigen::VectorXd>(phys_.data(), phys_.size());
    }

    /// N(v) = -(i k / 2) F[ (F^-1 v)^2 ]
    Eigen::VectorXcd nonlinear(const Eigen::VectorXcd& v)
    {
        Eigen::VectorXd u = inverse(v);
        Eigen::VectorXd u2 = u.cwiseProduct(u);
        return g_.cwiseProduct(forward(u2));
    }

    KSParams params_;
    double dt_;
    double epsilon_;
    std::vector<double> wave_;
    Eigen::VectorXd e_full_, e_half_, q_, f1_, f2_, f3_;
    Eigen::VectorXcd g_;
    Eigen::FFT<double> fft_;
    std::vector<double> phys_;                 // scratch, physical space
    std::vector<std::complex<double>> spec_;   // scratch, spectral space
};

/// One-shot convenience wrapper; hot paths should hold a KsEtdrk4 instance.
inline StateVector ks_step(const StateVector& state, const KSParams& params, double dt,
                           double epsilon = 0.0)
{
    KsEtdrk4 integrator(params, dt, epsilon);
    return integrator.step(state);
}

}  // namespace hyfc
