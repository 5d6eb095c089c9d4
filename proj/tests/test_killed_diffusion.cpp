#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qslab/errors.hpp"
#include "qslab/killed_diffusion.hpp"
#include "qslab/rng.hpp"

#include <cmath>
#include <vector>

using namespace qslab;
using namespace qslab::diffusion;

TEST_CASE("kappa_from_target: OU instance recovers kappa(y) = y^2 and K = 1/2") {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(-5.0 + 0.1 * i);
    const auto result = kappa_from_target(
        [](double x) { return -x * x; },          // log N(0, 1/2) density
        [](double x) { return -0.25 * x * x; },   // OU potential
        grid, 1e-4);
    CHECK(result.K == doctest::Approx(0.5).epsilon(1e-6));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(result.kappa[i] - grid[i] * grid[i]) <= 1e-6);
}

TEST_CASE("kappa_from_target: Brownian motion targeting N(0,1) gives y^2/2") {
    std::vector<double> grid;
    for (int i = 0; i <= 80; ++i) grid.push_back(-4.0 + 0.1 * i);
    const auto result = kappa_from_target([](double x) { return -0.5 * x * x; },
                                          [](double) { return 0.0; }, grid, 1e-4);
    CHECK(result.K == doctest::Approx(0.5).epsilon(1e-6));
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(result.kappa[i] - 0.5 * grid[i] * grid[i]) <= 1e-5);
}

TEST_CASE("kappa_from_target: target matching the invariant density is constant") {
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(-3.0 + 0.1 * i);
    // pi proportional to gamma = exp(2A) for the OU potential
    const auto result = kappa_from_target([](double x) { return -0.5 * x * x; },
                                          [](double x) { return -0.25 * x * x; },
                                          grid, 1e-4);
    for (double k : result.kappa) CHECK(std::abs(k) <= 1e-6);
}

TEST_CASE("kappa_from_target validation") {
    CHECK_THROWS_AS(kappa_from_target([](double) { return 0.0; },
                                      [](double) { return 0.0; }, {}, 1e-4),
                    domain_error);
    CHECK_THROWS_AS(kappa_from_target([](double) { return 0.0; },
                                      [](double) { return 0.0; }, {0.0, 1.0}, 0.0),
                    domain_error);
    CHECK_THROWS_AS(kappa_from_target([](double) { return 0.0; },
                                      [](double) { return 0.0; }, {1.0, 0.0}, 1e-4),
                    domain_error);
}

TEST_CASE("ou_transition_sample has the exact one-step law") {
    PhiloxStream rng(31, 0);
    const double h = 0.25;
    const int n = 400000;

    SUBCASE("variance from the origin") {
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = ou_transition_sample(0.0, h, rng);
            sum += x;
            sum_sq += x * x;
        }
        const double var = -std::expm1(-h);
        CHECK(std::abs(sum / n) <= 0.005);
        CHECK(sum_sq / n == doctest::Approx(var).epsilon(0.01));
    }

    SUBCASE("mean decay from x = 2 at small h") {
        const double h_small = 0.01;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += ou_transition_sample(2.0, h_small, rng);
        CHECK(std::abs(sum / n - 2.0 * std::exp(-0.005)) <= 1e-3);
    }

    SUBCASE("large h reaches the standard normal stationary law") {
        double sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = ou_transition_sample(3.0, 50.0, rng);
            sum_sq += x * x;
        }
        CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.01));
    }
}

TEST_CASE("two-step composition has the one-step law (variance identity + samples)") {
    const double h = 0.8;
    // algebraic identity: e^{-h/2} (1 - e^{-h/2}) + (1 - e^{-h/2}) = 1 - e^{-h}
    const double v_half = -std::expm1(-0.5 * h);
    CHECK(std::exp(-0.5 * h) * v_half + v_half == doctest::Approx(-std::expm1(-h)).epsilon(1e-14));

    PhiloxStream rng(77, 0);
    const int n = 400000;
    double one_sq = 0.0, two_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = ou_transition_sample(1.5, h, rng);
        const double b = ou_transition_sample(ou_transition_sample(1.5, 0.5 * h, rng),
                                              0.5 * h, rng);
        const double mean = 1.5 * std::exp(-0.5 * h);
        one_sq += (a - mean) * (a - mean);
        two_sq += (b - mean) * (b - mean);
    }
    CHECK(one_sq / n == doctest::Approx(two_sq / n).epsilon(0.02));
}

TEST_CASE("simulate_killed_ensemble: no killing keeps every particle alive") {
    const auto ens = simulate_killed_ensemble(DiffusionSpec::ou(),
                                              KillingSpec::constant(0.0, 1.0), 2.0,
                                              0.01, 20000, 5);
    CHECK(ens.t == 2.0);
    for (auto a : ens.alive) CHECK(a == 1);
}

TEST_CASE("simulate_killed_ensemble: constant rate kills exponentially") {
    const double c = 0.6, T = 3.0;
    const auto ens = simulate_killed_ensemble(DiffusionSpec::ou(),
                                              KillingSpec::constant(c, 2.0), T, 0.01,
                                              100000, 11);
    std::size_t alive = 0;
    for (auto a : ens.alive) alive += a;
    const double expected = std::exp(-c * T);
    const double se = std::sqrt(expected * (1.0 - expected) / 100000.0);
    CHECK(std::abs(static_cast<double>(alive) / 100000.0 - expected) < 3.0 * se);
}

TEST_CASE("thinning correctness: constant-rate killing times are exponential") {
    const double c = 0.7;
    const auto record = simulate_kill_record(DiffusionSpec::ou(),
                                             KillingSpec::constant(c, 2.5), 8.0, 0.01,
                                             100000, 21);
    // empirical CDF against 1 - e^{-ct} on a time grid
    double sup_dist = 0.0;
    for (double t = 0.5; t <= 5.0; t += 0.5) {
        std::size_t killed = 0;
        for (double kt : record.kill_time)
            if (kt <= t) ++killed;
        const double emp = static_cast<double>(killed) / 100000.0;
        sup_dist = std::max(sup_dist, std::abs(emp - (1.0 - std::exp(-c * t))));
    }
    CHECK(sup_dist <= 0.01);
}

TEST_CASE("killing rate above the thinning bound is an invariant violation") {
    KillingSpec bad;
    bad.rate = [](double x) { return x * x; };
    bad.bound_M = 0.05;  // exceeded as soon as |x| > 0.22
    CHECK_THROWS_AS(simulate_killed_ensemble(DiffusionSpec::ou(), bad, 2.0, 0.01,
                                             2000, 3),
                    domain_error);
}

TEST_CASE("ensembles are bit-identical across thread counts") {
    const auto kspec = KillingSpec::truncated_quadratic(4.0);
    const auto a = simulate_killed_ensemble(DiffusionSpec::ou(), kspec, 2.0, 0.01,
                                            30000, 123, 0.0, 1);
    const auto b = simulate_killed_ensemble(DiffusionSpec::ou(), kspec, 2.0, 0.01,
                                            30000, 123, 0.0, 4);
    CHECK(a.positions == b.positions);
    CHECK(a.alive == b.alive);
}

TEST_CASE("custom drift runs through Euler-Maruyama") {
    // strongly mean-reverting drift keeps the ensemble near zero
    const auto dspec = DiffusionSpec::custom([](double x) { return -2.0 * x; });
    const auto ens = simulate_killed_ensemble(dspec, KillingSpec::constant(0.0, 1.0),
                                              4.0, 0.005, 20000, 9);
    double sum_sq = 0.0;
    for (double x : ens.positions) sum_sq += x * x;
    // stationary variance sigma^2 / (2 theta) = 1/4
    CHECK(sum_sq / 20000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("qsd_estimate: synthetic standard-normal sample") {
    ParticleEnsemble ens;
    ens.t = 1.0;
    PhiloxStream rng(55, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ens.positions.push_back(rng.normal());
        ens.alive.push_back(1);
    }
    const auto hist = qsd_estimate(ens, 60, {-4.0, 4.0});
    CHECK(hist.n_samples > 99000);
    double integral = 0.0;
    for (double d : hist.density) integral += d * hist.bin_width();
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l1_vs_gaussian(hist, 0.0, 1.0) < 0.02);
}

TEST_CASE("qsd_estimate: point mass is L1-distance ~2 from the Gaussian") {
    ParticleEnsemble ens;
    ens.positions.assign(1000, 0.3);
    ens.alive.assign(1000, 1);
    const auto hist = qsd_estimate(ens, 60, {-4.0, 4.0});
    CHECK(l1_vs_gaussian(hist, 0.0, 0.5) > 1.8);
}

TEST_CASE("qsd_estimate error paths") {
    ParticleEnsemble dead;
    dead.positions = {0.0, 1.0};
    dead.alive = {0, 0};
    CHECK_THROWS_AS(qsd_estimate(dead, 10, {-1.0, 1.0}), conditioning_error);
    ParticleEnsemble ok;
    ok.positions = {0.0};
    ok.alive = {1};
    CHECK_THROWS_AS(qsd_estimate(ok, 0, {-1.0, 1.0}), domain_error);
    CHECK_THROWS_AS(qsd_estimate(ok, 10, {1.0, -1.0}), domain_error);
}

TEST_CASE("survival_curve: constant rate fits the rate") {
    const double c = 0.8;
    const auto curve = survival_curve(DiffusionSpec::ou(), KillingSpec::constant(c, 2.0),
                                      5.0, 0.01, 100000, 17, 40);
    REQUIRE(curve.points.size() == 40);
    CHECK(curve.points.front().second == 1.0);
    CHECK(curve.fitted_rate == doctest::Approx(c).epsilon(0.03));
}

TEST_CASE("survival_curve: fit error when the chain dies immediately") {
    CHECK_THROWS_AS(survival_curve(DiffusionSpec::ou(), KillingSpec::constant(50.0, 50.0),
                                   10.0, 0.01, 2000, 3, 10),
                    numerical_error);
}
