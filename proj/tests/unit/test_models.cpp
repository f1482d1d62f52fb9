#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "latgas/models.hpp"

using namespace latgas;
using models::builtin_model;

TEST_SUITE("models") {
    TEST_CASE("exclusion coefficients and closed-form derivatives") {
        const auto m = builtin_model("ssep");
        for (double r : {0.1, 0.25, 0.5, 0.9}) {
            CHECK(m.D(r) == doctest::Approx(0.5).epsilon(1e-15));
            CHECK(m.chi(r) == doctest::Approx(r * (1.0 - r)).epsilon(1e-15));
            CHECK(m.chi_p(r) == doctest::Approx(1.0 - 2.0 * r).epsilon(1e-14));
            CHECK(m.chi_pp(r) == doctest::Approx(-2.0).epsilon(1e-14));
            CHECK(m.d_prime(r) == doctest::Approx(0.0).epsilon(1e-14));
        }
        CHECK(m.density_range[0] == 0.0);
        CHECK(m.density_range[1] == 1.0);
        CHECK_FALSE(m.has_field);
    }

    TEST_CASE("heat-conduction model obeys its quadratic mobility") {
        const auto m = builtin_model("kmp");
        CHECK(m.density_range[1] == doctest::Approx(10.0));
        for (double r : {0.5, 1.0, 3.0}) {
            CHECK(m.D(r) == doctest::Approx(1.0));
            CHECK(m.chi(r) == doctest::Approx(r * r).epsilon(1e-15));
            CHECK(m.chi_pp(r) == doctest::Approx(2.0).epsilon(1e-13));
        }
        const auto capped = builtin_model("kmp", {{"rho_max", 4.0}});
        CHECK(capped.density_range[1] == doctest::Approx(4.0));
    }

    TEST_CASE("zero-range model couples diffusion and mobility through one function") {
        const auto m = builtin_model("zero_range", {{"psi_scale", 1.5}, {"psi_power", 2.0}});
        for (double r : {0.2, 1.0, 2.5}) {
            CHECK(m.chi(r) == doctest::Approx(1.5 * r * r).epsilon(1e-14));
            // D equals the density derivative of the mobility
            CHECK(m.D(r) == doctest::Approx(m.chi_p(r)).epsilon(1e-12));
        }
    }

    TEST_CASE("constant-mobility model accepts negative densities") {
        const auto m = builtin_model("ginzburg_landau", {{"d0", 1.0}, {"d2", 0.5}, {"c0", 2.0}});
        CHECK(m.in_range(-3.0));
        CHECK(m.chi(-3.0) == doctest::Approx(2.0));
        CHECK(m.D(-2.0) == doctest::Approx(1.0 + 0.5 * 4.0).epsilon(1e-15));
        CHECK(m.chi_p(1.0) == doctest::Approx(0.0).epsilon(1e-13));
    }

    TEST_CASE("driven exclusion carries a constant field") {
        const auto m = builtin_model("wasep", {{"field", 2.5}});
        CHECK(m.has_field);
        CHECK(m.field_at(0.3) == doctest::Approx(2.5));
        const auto plain = builtin_model("ssep");
        CHECK(plain.field_at(0.3) == 0.0);
    }

    TEST_CASE("identity is determined by family, parameters, geometry, and range") {
        CHECK(builtin_model("ssep") == builtin_model("ssep"));
        CHECK(builtin_model("kmp") != builtin_model("kmp", {{"rho_max", 3.0}}));
        CHECK(builtin_model("ssep") != builtin_model("kmp"));
        CHECK(builtin_model("ssep", {}, BoundaryGeometry{0.2, 0.8}) !=
              builtin_model("ssep", {}, PeriodicGeometry{0.5}));
    }

    TEST_CASE("unknown families and parameters are rejected") {
        CHECK_THROWS_AS((void)builtin_model("asep"), std::invalid_argument);
        CHECK_THROWS_AS((void)builtin_model("ssep", {{"rho_max", 2.0}}), std::invalid_argument);
        CHECK_THROWS_AS((void)builtin_model("kmp", {{"rho_max", -1.0}}), std::invalid_argument);
        CHECK_THROWS_AS((void)builtin_model("zero_range", {{"psi_power", -2.0}}), std::invalid_argument);
    }

    TEST_CASE("numerical derivative fallback tracks closed forms") {
        auto m = builtin_model("ssep");
        m.has_closed_derivatives = false;  // force the central-difference path
        m.D_prime = nullptr;
        m.chi_prime = nullptr;
        m.chi_second = nullptr;
        for (double r : {0.2, 0.5, 0.7}) {
            CHECK(m.chi_p(r) == doctest::Approx(1.0 - 2.0 * r).epsilon(1e-8));
            CHECK(m.chi_pp(r) == doctest::Approx(-2.0).epsilon(1e-5));
            CHECK(m.d_prime(r) == doctest::Approx(0.0).epsilon(1e-8));
        }
    }

    TEST_CASE("fluctuation-response ratio of the exclusion family is constant") {
        const auto m = builtin_model("ssep");
        for (double r : {0.1, 0.3, 0.6, 0.85}) {
            // D(rho) = chi(rho) * f''(rho) / 2 with f'' = 1/(rho(1-rho))
            CHECK(m.D(r) == doctest::Approx(0.5 * m.chi(r) / (r * (1.0 - r))).epsilon(1e-14));
        }
    }
}
