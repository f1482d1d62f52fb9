#include <cmath>

#include "doctest.h"
#include "latgas/errors.hpp"
#include "latgas/models.hpp"
#include "latgas/pde.hpp"

using namespace latgas;

namespace {

const double kPi = 3.14159265358979323846;

// sup-norm deviation of the final frame from a reference function
double final_sup_error(const SpaceTimePath& path, const std::function<double(double)>& ref) {
    double sup = 0.0;
    const auto& last = path.frames.back();
    for (int i = 0; i < path.grid.node_count(); ++i)
        sup = std::max(sup, std::abs(last[static_cast<std::size_t>(i)] - ref(path.grid.node(i))));
    return sup;
}

}  // namespace

TEST_SUITE("pde") {
    TEST_CASE("sine perturbation decays at the diffusive rate") {
        // mode-1 deviation decays by exp(-pi^2 t / 2); amplitude 0.1 at t = 0.2
        const double expected = 0.037270783885343791;
        const Grid grid(128);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return 0.5 + 0.1 * std::sin(kPi * u);
        });
        const auto path = pde::solve_heat(gamma, 0.5, 0.5, 0.2, 0.0);
        double amp = 0.0;
        for (double v : path.frames.back()) amp = std::max(amp, std::abs(v - 0.5));
        CHECK(amp == doctest::Approx(expected).epsilon(5e-4));
    }

    TEST_CASE("halving the mesh reduces the decay error by at least a factor of three") {
        const double expected = 0.037270783885343791;
        auto amp_error = [&](int M) {
            const Grid grid(M);
            const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
                return 0.5 + 0.1 * std::sin(kPi * u);
            });
            const auto path = pde::solve_heat(gamma, 0.5, 0.5, 0.2, 0.5 / M);
            double amp = 0.0;
            for (double v : path.frames.back()) amp = std::max(amp, std::abs(v - 0.5));
            return std::abs(amp - expected);
        };
        CHECK(amp_error(32) >= 3.0 * amp_error(64));
    }

    TEST_CASE("stationary profile of the exclusion model is the linear interpolant") {
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        const auto rho = pde::stationary_profile(model, Grid(64));
        for (int i = 0; i < 65; ++i)
            CHECK(rho[i] == doctest::Approx(0.2 + 0.6 * rho.grid.node(i)).epsilon(1e-10));
    }

    TEST_CASE("stationary profile of the driven model carries a uniform current") {
        const auto model = models::builtin_model("wasep", {{"field", 1.5}}, BoundaryGeometry{0.2, 0.8});
        const auto rho = pde::stationary_profile(model, Grid(96));
        SpaceTimePath still;
        still.grid = rho.grid;
        still.kind = FieldKind::density;
        still.dt = 1.0;
        still.frames = {rho.values, rho.values};
        const auto J = pde::extract_current(still, model);
        double lo = 1e300, hi = -1e300;
        for (double v : J.frames[0]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo <= 1e-8);
    }

    TEST_CASE("hydrodynamic solver agrees with the constant-coefficient fast path") {
        const Grid grid(96);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return 0.4 + 0.2 * u + 0.05 * std::sin(2.0 * kPi * u);
        });
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.4, 0.6});
        const auto a = pde::solve_heat(gamma, 0.4, 0.6, 0.1, 0.0);
        const auto b = pde::solve_hydro(model, gamma, 0.1, 0.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < a.frames.back().size(); ++i)
            sup = std::max(sup, std::abs(a.frames.back()[i] - b.frames.back()[i]));
        CHECK(sup <= 1e-3);
    }

    TEST_CASE("continuity solve conserves mass under a divergence-free drive") {
        const Grid grid(64);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return 0.5 + 0.1 * std::cos(2.0 * kPi * u);
        });
        SpaceTimePath w;
        w.grid = grid;
        w.kind = FieldKind::current;
        w.dt = 0.01;
        w.frames.assign(21, std::vector<double>(64, 0.7));
        const auto rho = pde::solve_continuity(gamma, w, PeriodicGeometry{0.5});
        auto mass = [&](const std::vector<double>& f) {
            double s = 0.0;
            for (int i = 0; i < 64; ++i) s += f[static_cast<std::size_t>(i)];
            return s / 64.0;
        };
        const double m0 = mass(rho.frames.front());
        for (const auto& frame : rho.frames) CHECK(mass(frame) == doctest::Approx(m0).epsilon(1e-12));
    }

    TEST_CASE("extracted current of the linear profile is uniform") {
        const Grid grid(64);
        const auto lin = pde::linear_profile(grid, 0.2, 0.8);
        SpaceTimePath still;
        still.grid = grid;
        still.kind = FieldKind::density;
        still.dt = 1.0;
        still.frames = {lin.values, lin.values};
        const auto model = models::builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8});
        const auto J = pde::extract_current(still, model);
        for (double v : J.frames[0]) CHECK(v == doctest::Approx(-0.5 * 0.6).epsilon(1e-12));
    }

    TEST_CASE("gradient and divergence satisfy summation by parts") {
        const Grid grid(32);
        std::vector<double> f(33), g(32);
        for (int i = 0; i <= 32; ++i) f[static_cast<std::size_t>(i)] = std::sin(3.0 * grid.node(i)) + 0.2;
        for (int i = 0; i < 32; ++i) g[static_cast<std::size_t>(i)] = std::cos(2.0 * grid.center(i));
        const auto grad_f = pde::gradient_to_cells(grid, f);
        const auto div_g = pde::divergence_to_nodes(grid, g, false);
        const double h = grid.h();
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < 32; ++i) lhs += h * grad_f[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
        for (int i = 0; i <= 32; ++i) {
            const double weight = (i == 0 || i == 32) ? 0.5 : 1.0;
            rhs += h * weight * f[static_cast<std::size_t>(i)] * div_g[static_cast<std::size_t>(i)];
        }
        // boundary flux terms close the discrete integration by parts
        const double boundary = f[32] * g[31] - f[0] * g[0];
        CHECK(lhs == doctest::Approx(boundary - rhs).epsilon(1e-12));
    }

    TEST_CASE("dynamics reject out-of-range boundary data") {
        const Grid grid(32);
        const auto gamma = pde::linear_profile(grid, 0.2, 0.8);
        CHECK_THROWS_AS((void)pde::solve_heat(gamma, -0.1, 0.8, 0.1, 0.0), ValidationError);
        CHECK_THROWS_AS((void)pde::solve_heat(gamma, 0.2, 0.8, -1.0, 0.0), ValidationError);
    }
}
