#pragma once

#include "qslab/rng.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace qslab::diffusion {

// Monte-Carlo simulation of 1-D diffusions dX = grad A(X) dt + dW killed at
// a bounded state-dependent rate, realized by Poisson thinning: candidate
// events arrive at rate bound_M and are accepted with probability
// rate(x)/bound_M at the pre-move grid position.

using Fn1D = std::function<double(double)>;

struct DiffusionSpec {
    enum class Kind { ou_half_rate, custom_1d };
    Kind kind;
    Fn1D drift;  // grad A; fixed to -x/2 for ou_half_rate

    // dX = (1/2)(-X) dt + dW, stepped by its exact transition law.
    static DiffusionSpec ou();
    // Arbitrary drift, stepped by Euler-Maruyama.
    static DiffusionSpec custom(Fn1D grad_a);
};

struct KillingSpec {
    Fn1D rate;       // kappa >= 0; must not exceed bound_M anywhere visited
    double bound_M;  // thinning intensity bound

    // kappa_M(x) = min(x^2, M).
    static KillingSpec truncated_quadratic(double M);
    static KillingSpec constant(double c, double bound);
};

struct ParticleEnsemble {
    std::vector<double> positions;
    std::vector<std::uint8_t> alive;
    double t = 0.0;
    std::uint64_t seed = 0;
};

// Reconstruction of the killing rate that makes log_pi the QSD log-density of
// the diffusion with potential A:
//   kappa = 1/2 ((log pi)'' + ((log pi)')^2 - 2 A' (log pi)' - 2 A'') + K,
// evaluated by central differences, with K clamping the minimum to zero.
struct KappaFromTarget {
    std::vector<double> kappa;  // on the supplied grid
    double K;
};
KappaFromTarget kappa_from_target(const Fn1D& log_pi, const Fn1D& A,
                                  const std::vector<double>& grid, double fd_step);

// One exact OU transition step: Normal(e^{-h/2} x, 1 - e^{-h}).
double ou_transition_sample(double x, double h, PhiloxStream& rng);

ParticleEnsemble simulate_killed_ensemble(const DiffusionSpec& dspec,
                                          const KillingSpec& kspec, double T,
                                          double dt, std::uint64_t n_particles,
                                          std::uint64_t seed, double x0 = 0.0,
                                          unsigned threads = 0);

struct HistogramDensity {
    std::vector<double> density;  // integrates to 1 over [lo, hi]
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t n_samples = 0;

    double bin_width() const {
        return (hi - lo) / static_cast<double>(density.size());
    }
    double bin_center(std::size_t i) const {
        return lo + (static_cast<double>(i) + 0.5) * bin_width();
    }
};

// Normalized histogram of the alive particles inside [range.first, range.second).
HistogramDensity qsd_estimate(const ParticleEnsemble& ensemble, int bins,
                              std::pair<double, double> range);

// Sum over bins of |histogram bin mass - Gaussian bin mass|; an L1 estimate
// of the distance between the sampled law and Normal(mean, variance).
double l1_vs_gaussian(const HistogramDensity& hist, double mean, double variance);

struct SurvivalCurve {
    std::vector<std::pair<double, double>> points;  // (t, alive fraction)
    double fitted_rate = 0.0;  // |slope| of the log-linear fit, second half
};

SurvivalCurve survival_curve(const DiffusionSpec& dspec, const KillingSpec& kspec,
                             double T, double dt, std::uint64_t n_particles,
                             std::uint64_t seed, int n_checkpoints, double x0 = 0.0,
                             unsigned threads = 0);

// Per-particle kill times (infinity for survivors) and final positions from
// one simulation run; the building block behind the ensemble and the curve.
struct KillRecord {
    std::vector<double> kill_time;  // infinity if alive at T
    std::vector<double> position;   // position at T (survivors) or at death
};
KillRecord simulate_kill_record(const DiffusionSpec& dspec, const KillingSpec& kspec,
                                double T, double dt, std::uint64_t n_particles,
                                std::uint64_t seed, double x0 = 0.0,
                                unsigned threads = 0);

ParticleEnsemble ensemble_from_record(const KillRecord& record, double T,
                                      std::uint64_t seed);
SurvivalCurve curve_from_record(const KillRecord& record, double T, int n_checkpoints);

} // namespace qslab::diffusion
