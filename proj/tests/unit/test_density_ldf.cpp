#include <cmath>

#include "doctest.h"
#include "latgas/density_ldf.hpp"
#include "latgas/errors.hpp"
#include "latgas/models.hpp"
#include "latgas/pde.hpp"

using namespace latgas;

namespace {

const double kPi = 3.14159265358979323846;

GridFunction linear_plus_sine(const Grid& grid, double alpha, double beta, double amp, int mode) {
    return GridFunction::tabulate(grid, FieldKind::density, [=](double u) {
        return alpha + (beta - alpha) * u + amp * std::sin(kPi * mode * u);
    });
}

}  // namespace

TEST_SUITE("density_ldf") {
    TEST_CASE("local free energy of a uniform displacement matches the closed form") {
        // x log(x/y) + (1-x) log((1-x)/(1-y)) integrated over a constant pair
        const double expected = 0.020135513550688873;
        const Grid grid(100);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double) { return 0.6; });
        const auto rho_bar = GridFunction::tabulate(grid, FieldKind::density, [](double) { return 0.5; });
        CHECK(ldf::free_energy_F0(gamma, rho_bar) == doctest::Approx(expected).epsilon(1e-14));
    }

    TEST_CASE("local free energy is nonnegative and vanishes only at the reference") {
        const Grid grid(64);
        const auto rho_bar = pde::linear_profile(grid, 0.3, 0.7);
        CHECK(ldf::free_energy_F0(rho_bar, rho_bar) == doctest::Approx(0.0).epsilon(1e-15));
        const auto gamma = linear_plus_sine(grid, 0.3, 0.7, 0.05, 2);
        CHECK(ldf::free_energy_F0(gamma, rho_bar) > 0.0);
    }

    TEST_CASE("profiles touching the exclusion bounds in the interior have infinite cost") {
        const Grid grid(64);
        const auto rho_bar = pde::linear_profile(grid, 0.3, 0.7);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return u < 0.5 ? 0.0 : 0.5;  // hits 0 on an interior stretch
        });
        CHECK(std::isinf(ldf::free_energy_F0(gamma, rho_bar)));
    }

    TEST_CASE("stationary profile solves the auxiliary problem exactly") {
        const Grid grid(128);
        const auto gamma = pde::linear_profile(grid, 0.2, 0.8);
        const auto sol = ldf::solve_F_bvp(gamma, 0.2, 0.8);
        double sup = 0.0;
        for (int i = 0; i <= 128; ++i) sup = std::max(sup, std::abs(sol.F[i] - gamma[i]));
        CHECK(sup <= 1e-9);
        CHECK(sol.value <= 1e-12);
        CHECK(sol.residual_sup <= 1e-6);
        CHECK(sol.endpoint_error <= 1e-10);
    }

    TEST_CASE("auxiliary solutions are strictly increasing with pinned endpoints") {
        const Grid grid(128);
        for (int mode : {1, 2, 3}) {
            const auto gamma = linear_plus_sine(grid, 0.2, 0.8, 0.12, mode);
            const auto sol = ldf::solve_F_bvp(gamma, 0.2, 0.8);
            CHECK(sol.F[0] == doctest::Approx(0.2).epsilon(1e-12));
            CHECK(std::abs(sol.F[128] - 0.8) <= 1e-9);
            for (int i = 0; i < 128; ++i) CHECK(sol.F[i + 1] > sol.F[i]);
            CHECK(sol.residual_sup <= 1e-6);
            CHECK(sol.value > 0.0);
        }
    }

    TEST_CASE("nonequilibrium value dominates the local-equilibrium value") {
        const Grid grid(128);
        const auto rho_bar = pde::linear_profile(grid, 0.2, 0.8);
        const auto gamma = linear_plus_sine(grid, 0.2, 0.8, 0.1, 2);
        const auto sol = ldf::solve_F_bvp(gamma, 0.2, 0.8);
        CHECK(sol.value >= ldf::free_energy_F0(gamma, rho_bar) - 1e-12);
    }

    TEST_CASE("boundary-value inputs are validated") {
        const Grid grid(64);
        const auto gamma = pde::linear_profile(grid, 0.2, 0.8);
        CHECK_THROWS_AS((void)ldf::solve_F_bvp(gamma, 0.8, 0.2), ValidationError);
        CHECK_THROWS_AS((void)ldf::solve_F_bvp(gamma, 0.5, 0.5), ValidationError);
        CHECK_THROWS_AS((void)ldf::solve_F_bvp(gamma, 0.0, 0.8), ValidationError);
        auto bad = gamma;
        bad.values[10] = 1.2;
        CHECK_THROWS_AS((void)ldf::solve_F_bvp(bad, 0.2, 0.8), ValidationError);
    }

    TEST_CASE("dissipative relaxation has vanishing action") {
        const Grid grid(128);
        const auto gamma = linear_plus_sine(grid, 0.2, 0.8, 0.1, 1);
        const auto path = pde::solve_heat(gamma, 0.2, 0.8, 0.25, 0.0);
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        const auto eval = ldf::rate_density(path, model);
        CHECK(eval.cost >= 0.0);
        CHECK(eval.cost <= 1e-6);
    }

    TEST_CASE("action grows quadratically in the deviation amplitude") {
        const Grid grid(96);
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        auto cost_at = [&](double eps) {
            SpaceTimePath path;
            path.grid = grid;
            path.kind = FieldKind::density;
            path.dt = 0.01;
            const int K = 21;
            path.frames.resize(K);
            for (int k = 0; k < K; ++k) {
                const double t = path.dt * k;
                path.frames[static_cast<std::size_t>(k)].resize(97);
                for (int i = 0; i <= 96; ++i) {
                    const double u = grid.node(i);
                    path.frames[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                        0.2 + 0.6 * u + eps * std::sin(kPi * u) * std::sin(kPi * t);
                }
            }
            return ldf::rate_density(path, model).cost;
        };
        const double c1 = cost_at(1e-3);
        const double c2 = cost_at(2e-3);
        CHECK(c1 > 0.0);
        CHECK(c2 / c1 == doctest::Approx(4.0).epsilon(0.02));
    }

    TEST_CASE("external potential vanishes at both walls") {
        const Grid grid(96);
        const auto gamma = linear_plus_sine(grid, 0.2, 0.8, 0.08, 2);
        const auto path = pde::solve_heat(gamma, 0.2, 0.8, 0.1, 0.0);
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        const auto eval = ldf::rate_density(path, model);
        for (const auto& frame : eval.H.frames) {
            CHECK(std::abs(frame.front()) <= 1e-8);
            CHECK(std::abs(frame.back()) <= 1e-8);
        }
    }

    TEST_CASE("paths that drift off the reservoir values are rejected") {
        const Grid grid(64);
        const auto gamma = pde::linear_profile(grid, 0.2, 0.8);
        auto path = pde::solve_heat(gamma, 0.2, 0.8, 0.05, 0.0);
        for (auto& frame : path.frames) frame.front() += 1e-3;
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        CHECK_THROWS_AS((void)ldf::rate_density(path, model), ValidationError);
    }

    TEST_CASE("incompatible periodic mass drift yields infinite action") {
        const Grid grid(64);
        const auto model = models::builtin_model("ssep", {}, PeriodicGeometry{0.5});
        SpaceTimePath path;
        path.grid = grid;
        path.kind = FieldKind::density;
        path.dt = 0.05;
        path.frames.resize(3);
        for (int k = 0; k < 3; ++k) {
            path.frames[static_cast<std::size_t>(k)].assign(65, 0.5 + 0.01 * k);  // mass not conserved
        }
        const auto eval = ldf::rate_density(path, model);
        CHECK(std::isinf(eval.cost));
    }
}
