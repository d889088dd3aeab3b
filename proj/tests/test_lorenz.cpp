#include <hyfc/lorenz.hpp>
#include <hyfc/systems.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace hyfc;

namespace {
StateVector vec3(double x, double y, double z)
{
    StateVector v(3);
    v << x, y, z;
    return v;
}
}  // namespace

TEST_CASE("lorenz derivative at canonical points")
{
    const LorenzParams p;
    CHECK(lorenz_derivative(vec3(0, 0, 0), p).isZero());

    const StateVector d = lorenz_derivative(vec3(1, 1, 1), p);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 26.0);
    CHECK_THAT(d[2], Catch::Matchers::WithinAbs(-5.0 / 3.0, 1e-15));

    // nontrivial equilibrium (sqrt(c(b-1)), sqrt(c(b-1)), b-1)
    const double s = std::sqrt(p.c * (p.b - 1.0));
    CHECK(lorenz_derivative(vec3(s, s, p.b - 1.0), p).norm() < 1e-12);
}

TEST_CASE("lorenz derivative rejects non-finite input")
{
    const LorenzParams p;
    CHECK_THROWS_AS(lorenz_derivative(vec3(1, std::nan(""), 0), p), std::domain_error);
    CHECK_THROWS_AS(lorenz_derivative(vec3(1, 2, INFINITY), p), std::domain_error);
}

TEST_CASE("lorenz step preserves equilibria")
{
    const LorenzParams p;
    const double s = std::sqrt(p.c * (p.b - 1.0));
    const StateVector fp = vec3(s, s, p.b - 1.0);
    CHECK((lorenz_step(fp, p, 0.1) - fp).norm() < 1e-9);
    CHECK((lorenz_step(vec3(0, 0, 0), p, 0.1)).norm() < 1e-15);
}

TEST_CASE("lorenz step is consistent under step splitting")
{
    const LorenzParams p;
    const StateVector u0 = vec3(1, 1, 1);
    const StateVector one = lorenz_step(u0, p, 0.1);
    const StateVector two = lorenz_step(lorenz_step(u0, p, 0.05), p, 0.05);
    CHECK((one - two).norm() < 1e-7);
}

TEST_CASE("lorenz step halving the internal substep changes little")
{
    const LorenzParams p;
    const StateVector u0 = vec3(-3.2, 4.1, 21.0);
    const StateVector coarse = lorenz_step(u0, p, 0.1, 10);
    const StateVector fine = lorenz_step(u0, p, 0.1, 20);
    CHECK((coarse - fine).norm() / fine.norm() < 1e-6);
}

TEST_CASE("lorenz trajectory stays inside the attractor box")
{
    // box frozen from a 3-seed x 5000-time-unit reference integration
    Trajectory t = generate_trajectory(SystemId::lorenz, 1000.0, 0.1, 0.0, 17);
    REQUIRE(t.count() == 10001);
    for (Eigen::Index i = 0; i < t.count(); ++i) {
        const auto u = t.sample(i);
        CHECK(std::abs(u[0]) <= 25.0);
        CHECK(std::abs(u[1]) <= 32.0);
        CHECK(u[2] >= 0.0);
        CHECK(u[2] <= 55.0);
    }
}

TEST_CASE("lorenz step reports divergence")
{
    LorenzParams p;
    CHECK_THROWS_AS(lorenz_step(vec3(1e5, 1e5, 1e5), p, 1.0, 1000), IntegrationBlowup);
}
