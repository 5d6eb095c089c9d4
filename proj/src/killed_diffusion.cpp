#include "qslab/killed_diffusion.hpp"

#include "qslab/errors.hpp"
#include "qslab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qslab::diffusion {

DiffusionSpec DiffusionSpec::ou() {
    DiffusionSpec spec;
    spec.kind = Kind::ou_half_rate;
    spec.drift = [](double x) { return -0.5 * x; };
    return spec;
}

DiffusionSpec DiffusionSpec::custom(Fn1D grad_a) {
    if (!grad_a) throw domain_error("DiffusionSpec: custom drift must be callable");
    DiffusionSpec spec;
    spec.kind = Kind::custom_1d;
    spec.drift = std::move(grad_a);
    return spec;
}

KillingSpec KillingSpec::truncated_quadratic(double M) {
    if (!(M > 0.0)) throw domain_error("KillingSpec: truncation level must be positive");
    KillingSpec spec;
    spec.rate = [M](double x) { return std::min(x * x, M); };
    spec.bound_M = M;
    return spec;
}

KillingSpec KillingSpec::constant(double c, double bound) {
    if (c < 0.0 || !(bound > 0.0) || c > bound)
        throw domain_error("KillingSpec: need 0 <= c <= bound");
    KillingSpec spec;
    spec.rate = [c](double) { return c; };
    spec.bound_M = bound;
    return spec;
}

KappaFromTarget kappa_from_target(const Fn1D& log_pi, const Fn1D& A,
                                  const std::vector<double>& grid, double fd_step) {
    if (!log_pi || !A) throw domain_error("kappa_from_target: functions must be callable");
    if (grid.empty()) throw domain_error("kappa_from_target: grid must be nonempty");
    if (!(fd_step > 0.0)) throw domain_error("kappa_from_target: fd_step must be positive");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1]))
            throw domain_error("kappa_from_target: grid must be strictly increasing");

    const double h = fd_step;
    auto d1 = [h](const Fn1D& f, double y) { return (f(y + h) - f(y - h)) / (2.0 * h); };
    auto d2 = [h](const Fn1D& f, double y) {
        return (f(y + h) - 2.0 * f(y) + f(y - h)) / (h * h);
    };

    KappaFromTarget out;
    out.kappa.resize(grid.size());
    double bracket_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double y = grid[i];
        const double lp1 = d1(log_pi, y);
        const double lp2 = d2(log_pi, y);
        const double a1 = d1(A, y);
        const double a2 = d2(A, y);
        // Delta pi / pi = (log pi)'' + ((log pi)')^2 in one dimension.
        const double bracket = 0.5 * (lp2 + lp1 * lp1 - 2.0 * a1 * lp1 - 2.0 * a2);
        if (!std::isfinite(bracket))
            throw numerical_error("kappa_from_target: non-finite derivative estimate at y = " +
                                  std::to_string(y));
        out.kappa[i] = bracket;
        bracket_min = std::min(bracket_min, bracket);
    }
    out.K = std::max(0.0, -bracket_min);
    for (double& k : out.kappa) k += out.K;
    return out;
}

double ou_transition_sample(double x, double h, PhiloxStream& rng) {
    if (!(h > 0.0)) throw domain_error("ou_transition_sample: h must be positive");
    const double mean = std::exp(-0.5 * h) * x;
    const double variance = -std::expm1(-h);  // 1 - e^{-h}
    return mean + std::sqrt(variance) * rng.normal();
}

namespace {

struct StepPlan {
    long n_steps;
    double h;
};

StepPlan plan_steps(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0))
        throw domain_error("simulation: T and dt must be positive");
    long n = std::lround(std::ceil(T / dt - 1e-12));
    n = std::max<long>(n, 1);
    return {n, T / static_cast<double>(n)};
}

} // namespace

KillRecord simulate_kill_record(const DiffusionSpec& dspec, const KillingSpec& kspec,
                                double T, double dt, std::uint64_t n_particles,
                                std::uint64_t seed, double x0, unsigned threads) {
    if (n_particles < 1) throw domain_error("simulation: need at least one particle");
    if (!(kspec.bound_M > 0.0))
        throw domain_error("simulation: thinning bound must be positive");
    const StepPlan plan = plan_steps(T, dt);
    const bool exact_ou = dspec.kind == DiffusionSpec::Kind::ou_half_rate;
    const double sqrt_h = std::sqrt(plan.h);
    const double ou_decay = std::exp(-0.5 * plan.h);
    const double ou_sd = std::sqrt(-std::expm1(-plan.h));

    KillRecord record;
    record.kill_time.assign(n_particles, std::numeric_limits<double>::infinity());
    record.position.assign(n_particles, x0);

    parallel_for(n_particles, threads, [&](std::size_t p) {
        PhiloxStream rng(seed, p);
        double x = x0;
        double next_candidate = rng.exponential(kspec.bound_M);
        for (long k = 0; k < plan.n_steps; ++k) {
            const double t1 = static_cast<double>(k + 1) * plan.h;
            // Candidates in this step are evaluated at the pre-move position.
            while (next_candidate <= t1) {
                const double rate = kspec.rate(x);
                if (rate > kspec.bound_M * (1.0 + 1e-12))
                    throw domain_error(
                        "killing rate exceeds the thinning bound at x = " +
                        std::to_string(x));
                if (rng.uniform01() <= rate / kspec.bound_M) {
                    record.kill_time[p] = next_candidate;
                    record.position[p] = x;
                    return;
                }
                next_candidate += rng.exponential(kspec.bound_M);
            }
            if (exact_ou) {
                x = ou_decay * x + ou_sd * rng.normal();
            } else {
                x += dspec.drift(x) * plan.h + sqrt_h * rng.normal();
            }
        }
        record.position[p] = x;
    });
    return record;
}

ParticleEnsemble ensemble_from_record(const KillRecord& record, double T,
                                      std::uint64_t seed) {
    ParticleEnsemble ensemble;
    ensemble.t = T;
    ensemble.seed = seed;
    ensemble.positions = record.position;
    ensemble.alive.resize(record.kill_time.size());
    for (std::size_t p = 0; p < record.kill_time.size(); ++p)
        ensemble.alive[p] = std::isinf(record.kill_time[p]) ? 1 : 0;
    return ensemble;
}

ParticleEnsemble simulate_killed_ensemble(const DiffusionSpec& dspec,
                                          const KillingSpec& kspec, double T,
                                          double dt, std::uint64_t n_particles,
                                          std::uint64_t seed, double x0,
                                          unsigned threads) {
    return ensemble_from_record(
        simulate_kill_record(dspec, kspec, T, dt, n_particles, seed, x0, threads), T,
        seed);
}

HistogramDensity qsd_estimate(const ParticleEnsemble& ensemble, int bins,
                              std::pair<double, double> range) {
    if (bins < 1) throw domain_error("qsd_estimate: bins must be >= 1");
    if (!(range.first < range.second))
        throw domain_error("qsd_estimate: empty range");
    if (ensemble.positions.size() != ensemble.alive.size())
        throw domain_error("qsd_estimate: ensemble lists have different lengths");

    HistogramDensity hist;
    hist.lo = range.first;
    hist.hi = range.second;
    hist.density.assign(static_cast<std::size_t>(bins), 0.0);
    const double width = hist.bin_width();

    std::uint64_t in_range = 0;
    for (std::size_t p = 0; p < ensemble.positions.size(); ++p) {
        if (!ensemble.alive[p]) continue;
        const double x = ensemble.positions[p];
        if (x < hist.lo || x >= hist.hi) continue;
        auto bin = static_cast<std::size_t>((x - hist.lo) / width);
        bin = std::min(bin, hist.density.size() - 1);
        hist.density[bin] += 1.0;
        ++in_range;
    }
    if (in_range == 0) throw conditioning_error(0.0);
    hist.n_samples = in_range;
    const double norm = static_cast<double>(in_range) * width;
    for (double& d : hist.density) d /= norm;
    return hist;
}

namespace {

double gaussian_cdf(double x, double mean, double sd) {
    return 0.5 * (1.0 + std::erf((x - mean) / (sd * std::sqrt(2.0))));
}

} // namespace

double l1_vs_gaussian(const HistogramDensity& hist, double mean, double variance) {
    if (!(variance > 0.0)) throw domain_error("l1_vs_gaussian: variance must be positive");
    const double sd = std::sqrt(variance);
    const double width = hist.bin_width();
    double total = 0.0;
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double a = hist.lo + static_cast<double>(i) * width;
        const double gauss_mass =
            gaussian_cdf(a + width, mean, sd) - gaussian_cdf(a, mean, sd);
        total += std::abs(hist.density[i] * width - gauss_mass);
    }
    return total;
}

SurvivalCurve curve_from_record(const KillRecord& record, double T, int n_checkpoints) {
    if (n_checkpoints < 2)
        throw domain_error("survival_curve: need at least two checkpoints");
    const auto n_particles = record.kill_time.size();

    SurvivalCurve curve;
    curve.points.reserve(static_cast<std::size_t>(n_checkpoints));
    for (int j = 0; j < n_checkpoints; ++j) {
        const double t = T * static_cast<double>(j) / static_cast<double>(n_checkpoints - 1);
        std::uint64_t alive = 0;
        for (double kt : record.kill_time)
            if (kt > t) ++alive;
        curve.points.emplace_back(
            t, static_cast<double>(alive) / static_cast<double>(n_particles));
    }

    // Log-linear least squares over the second half; the first half is burn-in.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t j = curve.points.size() / 2; j < curve.points.size(); ++j) {
        if (!(curve.points[j].second > 0.0)) continue;
        const double x = curve.points[j].first;
        const double y = std::log(curve.points[j].second);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2)
        throw numerical_error(
            "survival_curve: fewer than two positive-survival checkpoints in the fit window");
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    if (denom == 0.0) throw numerical_error("survival_curve: degenerate fit window");
    const double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
    curve.fitted_rate = std::abs(slope);
    return curve;
}

SurvivalCurve survival_curve(const DiffusionSpec& dspec, const KillingSpec& kspec,
                             double T, double dt, std::uint64_t n_particles,
                             std::uint64_t seed, int n_checkpoints, double x0,
                             unsigned threads) {
    return curve_from_record(
        simulate_kill_record(dspec, kspec, T, dt, n_particles, seed, x0, threads), T,
        n_checkpoints);
}

} // namespace qslab::diffusion
