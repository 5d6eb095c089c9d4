#pragma once

#include "qslab/errors.hpp"

#include <utility>
#include <vector>

namespace qslab::spectral {

// Eigenvalue solver for the Ornstein-Uhlenbeck generator with truncated
// quadratic killing kappa_M(x) = min(x^2, M),
//
//   -1/2 phi'' + (x/2) phi' + kappa_M phi = lambda phi   on L^2(R, e^{-x^2/2} dx).
//
// The polar substitution q = phi = rho cos(alpha), p = phi' = rho sin(alpha)
// turns this into a first-order phase equation
//
//   alpha' = 2 (kappa_M - lambda) cos^2(alpha) - sin^2(alpha)
//            + x sin(alpha) cos(alpha),
//
// with boundary angles on |x| >= sqrt(M) fixed by the square-integrable tail
// solutions. Eigenvalues are the lambda at which the transported angle meets
// the far boundary angle up to a whole number of pi windings.

struct EigenSolveConfig {
    double truncation_M;    // killing truncation level M >= 0
    double ode_step;        // phase-ODE step on [-sqrt(M), sqrt(M)]
    double quad_rel_tol;    // tail-integral quadrature tolerance
    double root_abs_tol;    // eigenvalue bisection tolerance
    double max_quad_range;  // upper cutoff for the semi-infinite quadrature

    static EigenSolveConfig for_truncation(double M);
    void validate() const;
};

// One point of the transported phase; alpha is continuous (unwrapped), not
// reduced mod pi.
struct PhasePoint {
    double x;
    double alpha;
};

struct SpectrumResult {
    double truncation_M = 0.0;
    std::vector<std::pair<int, double>> eigenvalues;      // (index n, lambda), ascending
    std::vector<std::pair<double, double>> s_curve;       // (lambda, s_value) samples
};

// Fewer roots exist below M than requested; carries what was found.
class partial_spectrum_error : public domain_error {
public:
    partial_spectrum_error(std::string what, SpectrumResult found)
        : domain_error(std::move(what)), partial(std::move(found)) {}
    SpectrumResult partial;
};

enum class Side { left, right };

// tan(alpha) at a tail point: the ratio of the two kernel integrals
//   -sqrt(2) K_{b+1}(x) / K_b(x)   (right side, exponent -r^2 - sqrt(2) r x)
//   +sqrt(2) variant with exponent -r^2 + sqrt(2) r x  (left side),
// with b = beta_star.
double kb_tail_ratio(double beta_star, double x, Side side,
                     const EigenSolveConfig& cfg);

// Principal boundary angle at x = -sqrt(M) (left) or +sqrt(M) (right) for an
// eigenvalue candidate lambda < M; beta_star = 2 (M - lambda).
double tail_angle(double M, double lambda, Side side, const EigenSolveConfig& cfg);

// Right-hand side of the phase ODE.
double phase_rhs(double x, double alpha, double M, double lambda);

// Full transported phase trajectory from -sqrt(M) to +sqrt(M), starting at
// the left boundary angle.
std::vector<PhasePoint> phase_trajectory(double M, double lambda,
                                         const EigenSolveConfig& cfg);

// Boundary mismatch after transport:
//   s_M(lambda) = alpha_right - alpha_left - (alpha(sqrt(M)-) - alpha(-sqrt(M))).
// Zeros of s - n pi are the eigenvalues.
double s_value(double M, double lambda, const EigenSolveConfig& cfg);

// Empirical direction of s_M in lambda (+1 increasing, -1 decreasing),
// detected from two probe evaluations. Fixes the sign of the n pi targets.
int s_direction(double M, const EigenSolveConfig& cfg);

// Bisection for the index-n eigenvalue inside an explicit bracket. The
// bracket must lie strictly below M and s - target must change sign over it.
double find_eigenvalue(double M, int n, std::pair<double, double> bracket,
                       const EigenSolveConfig& cfg);

// Same, with the bracket located automatically by scanning (0.01, M - 0.01).
double find_eigenvalue(double M, int n, const EigenSolveConfig& cfg);

// s_M sampled over an even lambda grid; used for the figure data.
std::vector<std::pair<double, double>> sample_s_curve(double M, double lambda_min,
                                                      double lambda_max, int steps,
                                                      const EigenSolveConfig& cfg,
                                                      unsigned threads = 0);

// First `count` eigenvalues (indices 0..count-1) plus the scanned s-curve.
SpectrumResult spectrum(double M, int count, const EigenSolveConfig& cfg,
                        unsigned threads = 0);

// Spectrum of the untruncated operator: 1/2 + 3/2 n.
double unperturbed_eigenvalue(int n);

// Separation lambda_1^M - 1/2 used to pick an admissible delta.
double delta_separation(double M, const EigenSolveConfig& cfg);

} // namespace qslab::spectral
