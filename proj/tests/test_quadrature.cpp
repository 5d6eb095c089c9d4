#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qslab/errors.hpp"
#include "qslab/quadrature.hpp"
#include "support/test_support.hpp"

#include <cmath>

using namespace qslab;

TEST_CASE("adaptive_simpson reproduces elementary integrals") {
    CHECK(quad::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(quad::adaptive_simpson([](double x) { return std::sin(x); }, 0.0,
                                 3.14159265358979323846, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(quad::adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0, 1e-10) == 0.0);
}

TEST_CASE("adaptive_simpson handles a sharply peaked integrand") {
    // Gaussian of width 1e-3 inside [0, 10]; the integral is sqrt(pi) * 1e-3.
    const double got = quad::adaptive_simpson(
        [](double x) {
            const double u = (x - 7.0) / 1e-3;
            return std::exp(-u * u);
        },
        0.0, 10.0, 1e-10);
    CHECK(got == doctest::Approx(std::sqrt(3.14159265358979323846) * 1e-3).epsilon(1e-8));
}

TEST_CASE("adaptive_simpson rejects bad tolerances") {
    CHECK_THROWS_AS(quad::adaptive_simpson([](double x) { return x; }, 0.0, 1.0, 0.0),
                    domain_error);
}

TEST_CASE("log_kb_kernel matches the Gamma-function values at x = 0") {
    // K_beta(0) = Gamma(beta/2) / 2.
    for (double beta : {0.3, 0.7, 1.0, 2.0, 3.5, 7.0, 19.0}) {
        const double expected = std::lgamma(0.5 * beta) - std::log(2.0);
        CHECK(quad::log_kb_kernel(beta, 0.0, 1e-11, 50.0) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("log_kb_kernel matches the closed form for beta = 1") {
    // K_1(x) = e^{x^2/2} (sqrt(pi)/2) erfc(x / sqrt(2)).
    for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0, 6.0}) {
        const double expected =
            0.5 * x * x +
            std::log(0.5 * std::sqrt(3.14159265358979323846) *
                     std::erfc(x / std::sqrt(2.0)));
        CHECK(quad::log_kb_kernel(1.0, x, 1e-11, 60.0) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("log_kb_kernel agrees with the brute-force oracle at large beta") {
    for (double beta : {19.0, 40.0, 79.0}) {
        const double x = std::sqrt(10.0);
        const double expected = std::log(testsupport::oracle_kernel(beta, x, 1e-13));
        CHECK(quad::log_kb_kernel(beta, x, 1e-11, 50.0) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("log_kb_kernel error paths") {
    CHECK_THROWS_AS(quad::log_kb_kernel(0.0, 1.0, 1e-10, 50.0), domain_error);
    CHECK_THROWS_AS(quad::log_kb_kernel(-1.0, 1.0, 1e-10, 50.0), domain_error);
    // Cutoff too small for the integrand to have decayed.
    CHECK_THROWS_AS(quad::log_kb_kernel(79.0, std::sqrt(40.0), 1e-10, 3.0),
                    numerical_error);
}
