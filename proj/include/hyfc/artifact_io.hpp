#pragma once

// Versioned binary serialization of trained models, so a readout fitted once
// can be reused for later predictions across process invocations.
//
// Layout (little-endian):
//   magic "HYFCMODL", u32 version,
//   u32 kind, u32 system,
//   i64 reservoir_dim, i64 input_dim,
//   f64 rho, sigma, avg_degree, dt, beta, xi, gamma, epsilon, signal_rms,
//   u64 seed,
//   W_out dense (i64 rows, i64 cols, f64 row-major),
//   A and W_in sparse (i64 rows, i64 cols, i64 nnz, then i32 row, i32 col, f64).

#include "hyfc/core.hpp"
#include "hyfc/hybrid.hpp"
#include "hyfc/reservoir.hpp"
#include "hyfc/systems.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyfc {

struct ModelArtifact {
    enum class Kind : std::uint32_t { reservoir = 0, hybrid = 1 };

    Kind kind = Kind::reservoir;
    SystemId system = SystemId::lorenz;
    ReservoirConfig config;     // dimensions, scales, dt, beta, xi, seed
    double gamma = 0.0;         // hybrid only
    double epsilon = 0.0;       // hybrid only
    double signal_rms = 0.0;    // training-data scale, used as error denominator
    ReadoutWeights readout;
    SparseMatrix adjacency;
    SparseMatrix input_weights;

    ReservoirNet to_reservoir_net() const
    {
        if (kind != Kind::reservoir)
            throw std::runtime_error("model artifact is not a reservoir model");
        ReservoirNet net{adjacency, input_weights, StateVector::Zero(adjacency.rows())};
        return net;
    }

    HybridNet to_hybrid_net() const
    {
        if (kind != Kind::hybrid) throw std::runtime_error("model artifact is not a hybrid model");
        HybridNet net{adjacency, input_weights, StateVector::Zero(adjacency.rows()),
                      StateVector::Zero(input_weights.cols() / 2)};
        return net;
    }
};

namespace detail {

inline constexpr char kModelMagic[8] = {'H', 'Y', 'F', 'C', 'M', 'O', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& origin)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw std::runtime_error(origin + ": truncated model artifact");
    return v;
}

inline void write_sparse(std::ostream& os, const SparseMatrix& m)
{
    write_pod<std::int64_t>(os, m.rows());
    write_pod<std::int64_t>(os, m.cols());
    write_pod<std::int64_t>(os, m.nonZeros());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            write_pod<std::int32_t>(os, static_cast<std::int32_t>(it.row()));
            write_pod<std::int32_t>(os, static_cast<std::int32_t>(it.col()));
            write_pod<double>(os, it.value());
        }
}

inline SparseMatrix read_sparse(std::istream& is, const std::string& origin)
{
    const auto rows = read_pod<std::int64_t>(is, origin);
    const auto cols = read_pod<std::int64_t>(is, origin);
    const auto nnz = read_pod<std::int64_t>(is, origin);
    if (rows < 0 || cols < 0 || nnz < 0 || nnz > rows * cols)
        throw std::runtime_error(origin + ": corrupt sparse matrix header");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (std::int64_t k = 0; k < nnz; ++k) {
        const auto r = read_pod<std::int32_t>(is, origin);
        const auto c = read_pod<std::int32_t>(is, origin);
        const auto v = read_pod<double>(is, origin);
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw std::runtime_error(origin + ": sparse entry out of bounds");
        triplets.emplace_back(r, c, v);
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

}  // namespace detail

inline void save_model(const std::string& path, const ModelArtifact& model)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(detail::kModelMagic, sizeof(detail::kModelMagic));
    detail::write_pod<std::uint32_t>(os, detail::kModelVersion);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.kind));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(model.system));
    detail::write_pod<std::int64_t>(os, model.config.reservoir_dim);
    detail::write_pod<std::int64_t>(os, model.input_weights.cols() / (model.kind == ModelArtifact::Kind::hybrid ? 2 : 1));
    detail::write_pod<double>(os, model.config.spectral_radius);
    detail::write_pod<double>(os, model.config.input_scale);
    detail::write_pod<double>(os, model.config.avg_degree);
    detail::write_pod<double>(os, model.config.dt);
    detail::write_pod<double>(os, model.config.ridge_beta);
    detail::write_pod<double>(os, model.config.resync_time);
    detail::write_pod<double>(os, model.gamma);
    detail::write_pod<double>(os, model.epsilon);
    detail::write_pod<double>(os, model.signal_rms);
    detail::write_pod<std::uint64_t>(os, model.config.seed);

    detail::write_pod<std::int64_t>(os, model.readout.rows());
    detail::write_pod<std::int64_t>(os, model.readout.cols());
    for (Eigen::Index i = 0; i < model.readout.rows(); ++i)
        for (Eigen::Index j = 0; j < model.readout.cols(); ++j)
            detail::write_pod<double>(os, model.readout(i, j));

    detail::write_sparse(os, model.adjacency);
    detail::write_sparse(os, model.input_weights);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline ModelArtifact load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open model artifact '" + path + "'");

    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kModelMagic, 8) != 0)
        throw std::runtime_error(path + ": not a model artifact file");
    const auto version = detail::read_pod<std::uint32_t>(is, path);
    if (version != detail::kModelVersion)
        throw std::runtime_error(path + ": unsupported model format version " +
                                 std::to_string(version));

    ModelArtifact m;
    const auto kind = detail::read_pod<std::uint32_t>(is, path);
    if (kind > 1) throw std::runtime_error(path + ": unknown model kind");
    m.kind = static_cast<ModelArtifact::Kind>(kind);
    const auto system = detail::read_pod<std::uint32_t>(is, path);
    if (system > 1) throw std::runtime_error(path + ": unknown system id");
    m.system = static_cast<SystemId>(system);

    m.config.reservoir_dim = static_cast<int>(detail::read_pod<std::int64_t>(is, path));
    const auto input_dim = detail::read_pod<std::int64_t>(is, path);
    m.config.spectral_radius = detail::read_pod<double>(is, path);
    m.config.input_scale = detail::read_pod<double>(is, path);
    m.config.avg_degree = detail::read_pod<double>(is, path);
    m.config.dt = detail::read_pod<double>(is, path);
    m.config.ridge_beta = detail::read_pod<double>(is, path);
    m.config.resync_time = detail::read_pod<double>(is, path);
    m.gamma = detail::read_pod<double>(is, path);
    m.epsilon = detail::read_pod<double>(is, path);
    m.signal_rms = detail::read_pod<double>(is, path);
    m.config.seed = detail::read_pod<std::uint64_t>(is, path);

    const auto rows = detail::read_pod<std::int64_t>(is, path);
    const auto cols = detail::read_pod<std::int64_t>(is, path);
    if (rows < 1 || cols < 1) throw std::runtime_error(path + ": corrupt readout header");
    m.readout.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m.readout(i, j) = detail::read_pod<double>(is, path);

    m.adjacency = detail::read_sparse(is, path);
    m.input_weights = detail::read_sparse(is, path);

    const auto expected_cols = m.kind == ModelArtifact::Kind::hybrid ? 2 * input_dim : input_dim;
    if (m.adjacency.rows() != m.config.reservoir_dim ||
        m.input_weights.rows() != m.config.reservoir_dim ||
        m.input_weights.cols() != expected_cols)
        throw std::runtime_error(path + ": inconsistent model dimensions");
    return m;
}

}  // namespace hyfc
