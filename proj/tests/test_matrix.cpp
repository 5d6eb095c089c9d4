#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qslab/errors.hpp"
#include "qslab/matrix.hpp"
#include "qslab/rng.hpp"

#include <cmath>

using namespace qslab;

TEST_CASE("matrix product and row_times") {
    Matrix a(2, 2);
    a(0, 0) = 1.0; a(0, 1) = 2.0; a(1, 0) = 3.0; a(1, 1) = 4.0;
    const Matrix sq = a * a;
    CHECK(sq(0, 0) == doctest::Approx(7.0));
    CHECK(sq(0, 1) == doctest::Approx(10.0));
    CHECK(sq(1, 0) == doctest::Approx(15.0));
    CHECK(sq(1, 1) == doctest::Approx(22.0));

    const auto v = row_times({1.0, 1.0}, a);
    CHECK(v[0] == doctest::Approx(4.0));
    CHECK(v[1] == doctest::Approx(6.0));
}

TEST_CASE("jacobi on a diagonal matrix is exact") {
    Matrix a(3, 3);
    a(0, 0) = 3.0; a(1, 1) = -1.0; a(2, 2) = 2.0;
    const auto e = jacobi_eigensolve(a);
    CHECK(e.values[0] == doctest::Approx(-1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    CHECK(e.values[2] == doctest::Approx(3.0));
}

TEST_CASE("jacobi matches the closed form for a symmetric 2x2") {
    Matrix a(2, 2);
    a(0, 0) = 2.0; a(0, 1) = 1.0; a(1, 0) = 1.0; a(1, 1) = 3.0;
    const auto e = jacobi_eigensolve(a);
    const double mean = 2.5, rad = std::sqrt(0.25 + 1.0);
    CHECK(e.values[0] == doctest::Approx(mean - rad).epsilon(1e-13));
    CHECK(e.values[1] == doctest::Approx(mean + rad).epsilon(1e-13));
}

TEST_CASE("jacobi reconstructs random symmetric matrices") {
    PhiloxStream rng(5, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 7.0);
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double v = 2.0 * rng.uniform01() - 1.0;
                a(i, j) = v;
                a(j, i) = v;
            }
        const auto e = jacobi_eigensolve(a);

        // eigenvalues ascending
        for (std::size_t j = 0; j + 1 < n; ++j) CHECK(e.values[j] <= e.values[j + 1]);

        // columns orthonormal
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j; k < n; ++k) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += e.vectors(i, j) * e.vectors(i, k);
                CHECK(dot == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-10));
            }

        // A v_j = lambda_j v_j
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                double av = 0.0;
                for (std::size_t k = 0; k < n; ++k) av += a(i, k) * e.vectors(k, j);
                CHECK(av == doctest::Approx(e.values[j] * e.vectors(i, j)).epsilon(1e-9));
            }
    }
}

TEST_CASE("jacobi rejects non-symmetric input") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(jacobi_eigensolve(a), domain_error);
}
