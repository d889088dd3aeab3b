#pragma once

// Shared value types and error types for the forecasting toolkit.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hyfc {

/// System state u(t): an M-dimensional real vector (M = 3 for Lorenz,
/// M = Q grid values for Kuramoto-Sivashinsky).
using StateVector = Eigen::VectorXd;

/// Uniformly sampled time series of states. Samples are stored one per
/// column so a single sample is a contiguous slice.
struct Trajectory {
    Eigen::MatrixXd samples;  // dim() x count(), column i = state at t0 + i*dt
    double dt = 0.0;
    double t0 = 0.0;

    Trajectory() = default;
    Trajectory(Eigen::MatrixXd data, double dt_, double t0_ = 0.0)
        : samples(std::move(data)), dt(dt_), t0(t0_) {}

    Eigen::Index dim() const { return samples.rows(); }
    Eigen::Index count() const { return samples.cols(); }
    bool empty() const { return samples.cols() == 0; }
    double duration() const { return count() > 0 ? (count() - 1) * dt : 0.0; }
    double time_at(Eigen::Index i) const { return t0 + i * dt; }

    Eigen::MatrixXd::ConstColXpr sample(Eigen::Index i) const { return samples.col(i); }

    /// Contiguous sub-series of `n` samples starting at index `first`.
    Trajectory segment(Eigen::Index first, Eigen::Index n) const
    {
        return Trajectory(samples.middleCols(first, n), dt, time_at(first));
    }
};

/// Thrown when an integration leaves the admissible region of state space.
class IntegrationBlowup : public std::runtime_error {
public:
    explicit IntegrationBlowup(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when power iteration fails to settle; carries the last estimate.
class SpectralRadiusError : public std::runtime_error {
public:
    SpectralRadiusError(const std::string& what, double last_estimate)
        : std::runtime_error(what), last_estimate_(last_estimate) {}
    double last_estimate() const { return last_estimate_; }

private:
    double last_estimate_;
};

/// Thrown by the ridge solver when the normal equations are singular.
class RankDeficiencyError : public std::runtime_error {
public:
    explicit RankDeficiencyError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

/// SplitMix64 finalizer; the mixing primitive behind all derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Derive an independent seed stream from a base seed and a stream index.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    return detail::splitmix64(seed ^ detail::splitmix64(stream));
}

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    return v.allFinite();
}

}  // namespace hyfc
