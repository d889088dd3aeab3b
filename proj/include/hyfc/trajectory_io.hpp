#pragma once

// Trajectory persistence: a CSV matrix (rows = samples, columns = state
// components) behind a one-line metadata header of the form
//   # system=<id> dt=<v> M=<v> seed=<v> epsilon=<v>

#include "hyfc/core.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyfc {

struct TrajectoryFile {
    Trajectory trajectory;
    std::string system;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
};

namespace detail {

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void save_trajectory(std::ostream& os, const Trajectory& t, const std::string& system,
                            std::uint64_t seed, double epsilon)
{
    os << "# system=" << system << " dt=" << detail::format_double(t.dt) << " M=" << t.dim()
       << " seed=" << seed << " epsilon=" << detail::format_double(epsilon) << "\n";
    for (Eigen::Index i = 0; i < t.count(); ++i) {
        for (Eigen::Index j = 0; j < t.dim(); ++j) {
            if (j) os << ',';
            os << detail::format_double(t.samples(j, i));
        }
        os << "\n";
    }
}

inline void save_trajectory(const std::string& path, const Trajectory& t,
                            const std::string& system, std::uint64_t seed, double epsilon)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_trajectory(os, t, system, seed, epsilon);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline TrajectoryFile load_trajectory(std::istream& is, const std::string& origin = "<stream>")
{
    std::string header;
    if (!std::getline(is, header) || header.rfind("# ", 0) != 0)
        throw std::runtime_error(origin + ": missing trajectory header line");

    TrajectoryFile out;
    long dim = -1;
    std::istringstream hs(header.substr(2));
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ": malformed header token '" + token + "'");
        const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "system") out.system = value;
        else if (key == "dt") out.trajectory.dt = std::stod(value);
        else if (key == "M") dim = std::stol(value);
        else if (key == "seed") out.seed = std::stoull(value);
        else if (key == "epsilon") out.epsilon = std::stod(value);
        else throw std::runtime_error(origin + ": unknown header key '" + key + "'");
    }
    if (out.system.empty() || dim < 1 || out.trajectory.dt <= 0.0)
        throw std::runtime_error(origin + ": incomplete trajectory header");

    std::vector<double> values;
    std::string line;
    long rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        long cols = 0;
        while (std::getline(ls, field, ',')) {
            values.push_back(std::stod(field));
            ++cols;
        }
        if (cols != dim)
            throw std::runtime_error(origin + ": row " + std::to_string(rows + 1) + " has " +
                                     std::to_string(cols) + " fields, expected " + std::to_string(dim));
        ++rows;
    }
    if (rows == 0) throw std::runtime_error(origin + ": no samples");

    Eigen::MatrixXd samples(dim, rows);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < dim; ++j) samples(j, i) = values[std::size_t(i) * dim + j];
    out.trajectory.samples = std::move(samples);
    return out;
}

inline TrajectoryFile load_trajectory(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open trajectory file '" + path + "'");
    return load_trajectory(is, path);
}

}  // namespace hyfc
