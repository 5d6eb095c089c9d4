#include "qslab/spectral_shooting.hpp"

#include "qslab/parallel.hpp"
#include "qslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qslab::spectral {

namespace {
constexpr double kPi = std::numbers::pi;
}

EigenSolveConfig EigenSolveConfig::for_truncation(double M) {
    EigenSolveConfig cfg;
    cfg.truncation_M = M;
    cfg.ode_step = M >= 1.0 ? std::sqrt(M) / 2000.0 : 5e-4;
    cfg.quad_rel_tol = 1e-10;
    cfg.root_abs_tol = 1e-7;
    cfg.max_quad_range = 50.0;
    cfg.validate();
    return cfg;
}

void EigenSolveConfig::validate() const {
    if (!(truncation_M >= 0.0))
        throw domain_error("EigenSolveConfig: truncation_M must be >= 0");
    if (!(ode_step > 0.0) || !(quad_rel_tol > 0.0) || !(root_abs_tol > 0.0) ||
        !(max_quad_range > 0.0))
        throw domain_error("EigenSolveConfig: tolerances and steps must be positive");
    if (truncation_M >= 1.0 && ode_step > std::sqrt(truncation_M) / 100.0)
        throw domain_error("EigenSolveConfig: ode_step above resolution floor sqrt(M)/100");
}

double kb_tail_ratio(double beta_star, double x, Side side,
                     const EigenSolveConfig& cfg) {
    if (!(beta_star > 0.0))
        throw domain_error("kb_tail_ratio: beta_star must be positive");
    cfg.validate();
    // The left-side kernels carry exp(+sqrt(2) r x); that is the right-side
    // kernel evaluated at -x.
    const double xs = (side == Side::right) ? x : -x;
    const double log_num =
        quad::log_kb_kernel(beta_star + 1.0, xs, cfg.quad_rel_tol, cfg.max_quad_range);
    const double log_den =
        quad::log_kb_kernel(beta_star, xs, cfg.quad_rel_tol, cfg.max_quad_range);
    const double ratio = std::sqrt(2.0) * std::exp(log_num - log_den);
    return (side == Side::right) ? -ratio : ratio;
}

double tail_angle(double M, double lambda, Side side, const EigenSolveConfig& cfg) {
    if (!(lambda < M))
        throw domain_error("tail_angle: eigenvalue candidate above truncation level");
    const double beta_star = 2.0 * (M - lambda);
    const double x = (side == Side::right) ? std::sqrt(M) : -std::sqrt(M);
    return std::atan(kb_tail_ratio(beta_star, x, side, cfg));
}

double phase_rhs(double x, double alpha, double M, double lambda) {
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    const double kappa_m = std::min(x * x, M);
    return 2.0 * (kappa_m - lambda) * c * c - s * s + x * s * c;
}

namespace {

// Classical RK4 transport of the unwrapped phase from x0 to x1 (either
// direction). A per-step angle change above pi/2 means the step cannot
// resolve the winding; that is reported instead of silently unwrapping
// wrongly.
double transport_alpha(double M, double lambda, double alpha0, double x0,
                       double x1, const EigenSolveConfig& cfg,
                       std::vector<PhasePoint>* trace) {
    long n = std::lround(std::ceil(std::abs(x1 - x0) / cfg.ode_step));
    n = std::max<long>(n, 1);
    const double h = (x1 - x0) / static_cast<double>(n);

    double alpha = alpha0;
    if (trace) trace->push_back({x0, alpha});
    double x = x0;
    for (long k = 0; k < n; ++k) {
        const double k1 = phase_rhs(x, alpha, M, lambda);
        const double k2 = phase_rhs(x + 0.5 * h, alpha + 0.5 * h * k1, M, lambda);
        const double k3 = phase_rhs(x + 0.5 * h, alpha + 0.5 * h * k2, M, lambda);
        const double k4 = phase_rhs(x + h, alpha + h * k3, M, lambda);
        const double dalpha = h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        if (std::abs(dalpha) > 0.5 * kPi)
            throw numerical_error(
                "phase transport: per-step angle change exceeds pi/2; reduce ode_step");
        alpha += dalpha;
        x = x0 + static_cast<double>(k + 1) * h;
        if (trace) trace->push_back({x, alpha});
    }
    return alpha;
}

// Both tail angles transported inward to the matching point x = 0. Shooting
// one-directionally across the whole interval amplifies roundoff in the
// phase like exp(~3M/2) -- the decaying solution is the repelling one when
// leaving a tail -- and the winding count turns into noise for M >= 20.
// Transporting inward from each boundary follows the attracting branch in
// both halves. Since the phase flow commutes with alpha -> alpha + pi, the
// midpoint mismatch has exactly the same roots and the same n pi structure
// as the full-transport mismatch.
struct MatchedAngles {
    double from_left;   // alpha(0) transported from -sqrt(M)
    double from_right;  // alpha(0) transported from +sqrt(M)
};

MatchedAngles transport_inward(double M, double lambda, const EigenSolveConfig& cfg) {
    const double xb = std::sqrt(M);
    MatchedAngles m;
    m.from_left = transport_alpha(M, lambda, tail_angle(M, lambda, Side::left, cfg),
                                  -xb, 0.0, cfg, nullptr);
    m.from_right = transport_alpha(M, lambda, tail_angle(M, lambda, Side::right, cfg),
                                   xb, 0.0, cfg, nullptr);
    return m;
}

} // namespace

std::vector<PhasePoint> phase_trajectory(double M, double lambda,
                                         const EigenSolveConfig& cfg) {
    const double xb = std::sqrt(M);
    std::vector<PhasePoint> trace;
    transport_alpha(M, lambda, tail_angle(M, lambda, Side::left, cfg), -xb, 0.0,
                    cfg, &trace);
    std::vector<PhasePoint> right_half;
    transport_alpha(M, lambda, tail_angle(M, lambda, Side::right, cfg), xb, 0.0,
                    cfg, &right_half);
    // Right half was walked inward; emit it in ascending x. The two branches
    // meet at x = 0 with a gap equal to s_value unless lambda is an eigenvalue.
    trace.insert(trace.end(), right_half.rbegin(), right_half.rend());
    return trace;
}

double s_value(double M, double lambda, const EigenSolveConfig& cfg) {
    const MatchedAngles m = transport_inward(M, lambda, cfg);
    return m.from_right - m.from_left;
}

int s_direction(double M, const EigenSolveConfig& cfg) {
    const double la = 0.15 * M;
    const double lb = 0.85 * M;
    const double ds = s_value(M, lb, cfg) - s_value(M, la, cfg);
    if (ds == 0.0)
        throw numerical_error("s_direction: probes could not resolve a direction");
    return ds > 0.0 ? 1 : -1;
}

namespace {

double bisect_eigenvalue(double M, double target, double lo, double hi,
                         const EigenSolveConfig& cfg) {
    double f_lo = s_value(M, lo, cfg) - target;
    const double f_hi = s_value(M, hi, cfg) - target;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (f_lo * f_hi > 0.0)
        throw bracket_error("find_eigenvalue: no sign change of s - target in bracket");

    // Bisection runs to ULP width; root_abs_tol is the accuracy the caller
    // may rely on, verified on the result below. Full refinement keeps the
    // returned root on the correct side of nearby landmarks (e.g. the
    // untruncated eigenvalue) instead of a tolerance-width midpoint.
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(mid)))
            break;
        const double f_mid = s_value(M, mid, cfg) - target;
        if (f_mid == 0.0) break;
        if ((f_lo < 0.0) == (f_mid < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if (std::abs(s_value(M, mid, cfg) - target) > cfg.root_abs_tol)
        throw numerical_error(
            "find_eigenvalue: bisection converged but the boundary mismatch "
            "exceeds root_abs_tol (s has a jump in the bracket)");
    return mid;
}

} // namespace

double find_eigenvalue(double M, int n, std::pair<double, double> bracket,
                       const EigenSolveConfig& cfg) {
    if (n < 0) throw domain_error("find_eigenvalue: index must be >= 0");
    if (!(bracket.first < bracket.second))
        throw bracket_error("find_eigenvalue: empty bracket");
    if (!(bracket.second < M))
        throw domain_error("find_eigenvalue: bracket touching truncation level M");
    const double target =
        (n == 0) ? 0.0 : static_cast<double>(s_direction(M, cfg)) * n * kPi;
    return bisect_eigenvalue(M, target, bracket.first, bracket.second, cfg);
}

namespace {

constexpr double kScanMargin = 0.01;
constexpr double kScanResolution = 0.05;

std::vector<double> scan_grid(double M) {
    std::vector<double> grid;
    const double lo = kScanMargin;
    const double hi = M - kScanMargin;
    if (!(lo < hi)) throw domain_error("spectrum scan: truncation level too small");
    for (double l = lo; l < hi; l += kScanResolution) grid.push_back(l);
    grid.push_back(hi);
    return grid;
}

} // namespace

std::vector<std::pair<double, double>> sample_s_curve(double M, double lambda_min,
                                                      double lambda_max, int steps,
                                                      const EigenSolveConfig& cfg,
                                                      unsigned threads) {
    if (steps < 1) throw domain_error("sample_s_curve: steps must be >= 1");
    // Samples sit at cell midpoints, so lambda_max = M stays below M.
    if (!(lambda_min < lambda_max) || !(lambda_max <= M))
        throw domain_error("sample_s_curve: need lambda_min < lambda_max <= M");
    std::vector<std::pair<double, double>> curve(static_cast<std::size_t>(steps));
    const double dl = (lambda_max - lambda_min) / static_cast<double>(steps);
    parallel_for(curve.size(), threads, [&](std::size_t i) {
        const double l = lambda_min + (static_cast<double>(i) + 0.5) * dl;
        curve[i] = {l, s_value(M, l, cfg)};
    });
    return curve;
}

SpectrumResult spectrum(double M, int count, const EigenSolveConfig& cfg,
                        unsigned threads) {
    if (count < 1) throw domain_error("spectrum: count must be >= 1");
    const std::vector<double> grid = scan_grid(M);

    SpectrumResult result;
    result.truncation_M = M;
    result.s_curve.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        result.s_curve[i] = {grid[i], s_value(M, grid[i], cfg)};
    });

    const double dir = result.s_curve.back().second > result.s_curve.front().second
                           ? 1.0
                           : -1.0;
    for (int n = 0; n < count; ++n) {
        const double target = dir * n * kPi;
        bool found = false;
        for (std::size_t i = 0; i + 1 < result.s_curve.size() && !found; ++i) {
            const double f0 = result.s_curve[i].second - target;
            const double f1 = result.s_curve[i + 1].second - target;
            if (f0 == 0.0) {
                result.eigenvalues.emplace_back(n, result.s_curve[i].first);
                found = true;
            } else if (f0 * f1 < 0.0) {
                result.eigenvalues.emplace_back(
                    n, bisect_eigenvalue(M, target, result.s_curve[i].first,
                                         result.s_curve[i + 1].first, cfg));
                found = true;
            }
        }
        if (!found)
            throw partial_spectrum_error(
                "spectrum: only " + std::to_string(n) + " of " + std::to_string(count) +
                    " eigenvalues found below M",
                std::move(result));
    }
    return result;
}

double find_eigenvalue(double M, int n, const EigenSolveConfig& cfg) {
    SpectrumResult r = spectrum(M, n + 1, cfg);
    return r.eigenvalues.back().second;
}

double unperturbed_eigenvalue(int n) {
    if (n < 0) throw domain_error("unperturbed_eigenvalue: index must be >= 0");
    return 0.5 + 1.5 * static_cast<double>(n);
}

double delta_separation(double M, const EigenSolveConfig& cfg) {
    return find_eigenvalue(M, 1, cfg) - 0.5;
}

} // namespace qslab::spectral
