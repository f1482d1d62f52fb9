#include <cmath>

#include "doctest.h"
#include "latgas/density_ldf.hpp"
#include "latgas/errors.hpp"
#include "latgas/pde.hpp"
#include "latgas/quasipotential.hpp"

using namespace latgas;

namespace {

const double kPi = 3.14159265358979323846;

GridFunction perturbed(const Grid& grid, double alpha, double beta, double amp, int mode) {
    return GridFunction::tabulate(grid, FieldKind::density, [=](double u) {
        return alpha + (beta - alpha) * u + amp * std::sin(kPi * mode * u);
    });
}

}  // namespace

TEST_SUITE("quasipotential") {
    TEST_CASE("auxiliary potential solves its logistic equation") {
        const Grid grid(128);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.1, 1);
        const auto phi = qp::solve_phi(gamma, 0.2, 0.8);
        CHECK(qp::phi_equation_residual(phi, gamma) <= 2e-6);
    }

    TEST_CASE("variational identity balances mobility against drift") {
        const Grid grid(128);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.08, 2);
        const auto res = qp::hamilton_jacobi_residual(gamma);
        CHECK(res.mobility_term >= 0.0);
        CHECK(std::abs(res.residual) <= 1e-4);
    }

    TEST_CASE("variational identity residual shrinks under grid refinement") {
        auto residual_at = [&](int M) {
            const auto gamma = perturbed(Grid(M), 0.2, 0.8, 0.08, 2);
            return std::abs(qp::hamilton_jacobi_residual(gamma).residual);
        };
        CHECK(residual_at(256) < residual_at(128));
    }

    TEST_CASE("excursion path starts at the stationary profile and ends at the target") {
        const Grid grid(96);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.1, 1);
        const auto adj = qp::adjoint_path(gamma, 0.2, 0.8);
        // construction anchors the reconstruction frame exactly at the target
        const auto& target_frame = adj.optimal_path.frames.back();
        for (int i = 0; i <= 96; ++i)
            CHECK(target_frame[static_cast<std::size_t>(i)] == doctest::Approx(gamma[i]).epsilon(1e-12));
        const auto& start_frame = adj.optimal_path.frames.front();
        double sup = 0.0;
        for (int i = 0; i <= 96; ++i)
            sup = std::max(sup, std::abs(start_frame[static_cast<std::size_t>(i)] -
                                         (0.2 + 0.6 * grid.node(i))));
        CHECK(sup <= 2e-4);
        CHECK(adj.final_deviation <= 1e-4);
    }

    TEST_CASE("excursion and relaxation are time reversals of each other") {
        const Grid grid(64);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.08, 1);
        const auto adj = qp::adjoint_path(gamma, 0.2, 0.8);
        const std::size_t K = adj.optimal_path.frames.size();
        REQUIRE(K == adj.rho_path.frames.size());
        for (std::size_t k = 0; k < K; ++k)
            CHECK(adj.optimal_path.frames[k] == adj.rho_path.frames[K - 1 - k]);
    }

    TEST_CASE("dynamical cost of the excursion matches the static value") {
        const Grid grid(128);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.1, 1);
        const auto check = qp::verify_quasipotential(gamma, 0.2, 0.8);
        CHECK(check.cost > 0.0);
        CHECK(check.free_energy > 0.0);
        CHECK(check.relative_gap <= 2e-2);
    }

    TEST_CASE("equal reservoirs reduce to the local-equilibrium cost") {
        const Grid grid(128);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return 0.5 + 0.1 * std::sin(kPi * u);
        });
        const auto check = qp::verify_quasipotential(gamma, 0.5, 0.5);
        CHECK(check.relative_gap <= 1e-2);
    }

    TEST_CASE("drift decomposition routes agree only for the true potential") {
        const Grid grid(96);
        const auto gamma = perturbed(grid, 0.2, 0.8, 0.1, 1);
        const auto honest = qp::adjoint_drift_consistency(gamma);
        CHECK(honest.sup_difference <= 1e-6);

        auto wrong = qp::solve_phi(gamma, 0.2, 0.8);
        for (auto& v : wrong.values) v *= 0.9;
        const auto broken = qp::adjoint_drift_consistency(gamma, &wrong);
        CHECK(broken.sup_difference > 1e-3);
    }

    TEST_CASE("profiles that ignore the reservoirs are rejected") {
        const Grid grid(64);
        const auto gamma = GridFunction::tabulate(grid, FieldKind::density, [](double u) {
            return 0.3 + 0.2 * u;  // endpoints 0.3, 0.5
        });
        CHECK_THROWS_AS((void)qp::adjoint_path(gamma, 0.2, 0.8), ValidationError);
        CHECK_THROWS_AS((void)qp::verify_quasipotential(gamma, 0.2, 0.8), ValidationError);
    }
}
