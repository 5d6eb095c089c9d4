#include "qslab/quadrature.hpp"

#include "qslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qslab::quad {

namespace {

constexpr double kEpsMach = std::numeric_limits<double>::epsilon();

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double& fc_out) {
    const double c = 0.5 * (a + b);
    fc_out = f(c);
    return (b - a) * (fa + 4.0 * fc_out + fb) / 6.0;
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double c, double fc, double whole,
             double eps, int depth) {
    double fd, fe;
    const double left = simpson(f, a, fa, c, fc, fd);
    const double right = simpson(f, c, fc, b, fb, fe);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * eps)
        return left + right + diff / 15.0;
    // Roundoff floor: the two estimates agree to machine precision, so
    // further subdivision cannot improve anything.
    if (std::abs(diff) <=
        64.0 * kEpsMach * (std::abs(left) + std::abs(right) + std::abs(whole)))
        return left + right + diff / 15.0;
    if (b - a <= 8.0 * kEpsMach * std::max({std::abs(a), std::abs(b), 1.0}))
        return left + right + diff / 15.0;
    if (depth <= 0)
        throw numerical_error("adaptive_simpson: recursion depth exhausted");
    const double d = 0.5 * (a + c), e = 0.5 * (c + b);
    return adapt(f, a, fa, c, fc, d, fd, left, 0.5 * eps, depth - 1) +
           adapt(f, c, fc, b, fb, e, fe, right, 0.5 * eps, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth) {
    if (!(rel_tol > 0.0))
        throw domain_error("adaptive_simpson: tolerance must be positive");
    if (a == b) return 0.0;

    // Composite pre-scan. Anchoring the tolerance to a single 3-point
    // estimate misjudges the scale of sharply peaked integrands by orders of
    // magnitude and sends the refinement into the roundoff regime.
    constexpr int kInitPanels = 64;
    const double h = (b - a) / (2.0 * kInitPanels);
    std::vector<double> fx(2 * kInitPanels + 1);
    for (int i = 0; i <= 2 * kInitPanels; ++i) fx[i] = f(a + h * i);

    double scale_estimate = 0.0;
    for (int p = 0; p < kInitPanels; ++p)
        scale_estimate += (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    scale_estimate *= h / 3.0;
    const double eps_total = rel_tol * std::max(std::abs(scale_estimate), 1e-300);

    double sum = 0.0;
    for (int p = 0; p < kInitPanels; ++p) {
        const double x0 = a + 2.0 * p * h;
        const double x2 = a + 2.0 * (p + 1) * h;
        const double whole =
            (x2 - x0) * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]) / 6.0;
        sum += adapt(f, x0, fx[2 * p], x2, fx[2 * p + 2], 0.5 * (x0 + x2),
                     fx[2 * p + 1], whole, eps_total / kInitPanels, max_depth);
    }
    return sum;
}

namespace {

// Log-integrand of the kernel: h(r) = (beta-1) log r - r^2 - sqrt(2) x r.
double kernel_exponent(double beta, double x, double r) {
    return (beta - 1.0) * std::log(r) - r * r - std::sqrt(2.0) * x * r;
}

// Stationary points of h solve 2 r^2 + sqrt(2) x r - (beta - 1) = 0.
void kernel_peaks(double beta, double x, double roots[2], int& count) {
    count = 0;
    const double b = std::sqrt(2.0) * x;
    const double disc = b * b + 8.0 * (beta - 1.0);
    if (disc < 0.0) return;
    const double s = std::sqrt(disc);
    for (double root : {(-b + s) / 4.0, (-b - s) / 4.0})
        if (root > 0.0) roots[count++] = root;
}

} // namespace

double log_kb_kernel(double beta, double x, double rel_tol, double max_range) {
    if (!(beta > 0.0))
        throw domain_error("log_kb_kernel: beta must be positive");
    if (!(rel_tol > 0.0) || !(max_range > 0.0))
        throw domain_error("log_kb_kernel: tolerance and range must be positive");

    const double sqrt2 = std::sqrt(2.0);

    // Piece A: r in (0, 1], substituted r = u^q so the integrand is bounded at 0.
    // Scaled by the max of g(r) = -r^2 - sqrt(2) x r over [0, 1].
    const double q = std::max(1.0, 2.0 / beta);
    const double r_gmax = std::clamp(-x / sqrt2, 0.0, 1.0);
    const double gmax = -r_gmax * r_gmax - sqrt2 * x * r_gmax;
    const double piece_a = adaptive_simpson(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            const double r = std::pow(u, q);
            const double g = -r * r - sqrt2 * x * r;
            return q * std::pow(u, q * beta - 1.0) * std::exp(g - gmax);
        },
        0.0, 1.0, rel_tol);
    const double log_a =
        piece_a > 0.0 ? gmax + std::log(piece_a) : -std::numeric_limits<double>::infinity();

    // Piece B: r in [1, R], in log scale around the max of h on [1, inf).
    double peaks[2];
    int n_peaks = 0;
    kernel_peaks(beta, x, peaks, n_peaks);
    double hmax = kernel_exponent(beta, x, 1.0);
    for (int i = 0; i < n_peaks; ++i)
        if (peaks[i] > 1.0) hmax = std::max(hmax, kernel_exponent(beta, x, peaks[i]));

    double r_hi = 2.0;
    for (int i = 0; i < n_peaks; ++i) r_hi = std::max(r_hi, 2.0 * peaks[i]);
    while (r_hi < max_range && kernel_exponent(beta, x, r_hi) - hmax > -60.0)
        r_hi *= 1.5;
    r_hi = std::min(r_hi, max_range);
    if (kernel_exponent(beta, x, r_hi) - hmax > -45.0)
        throw numerical_error(
            "log_kb_kernel: integrand not negligible at max_quad_range cutoff");

    const double piece_b = adaptive_simpson(
        [&](double r) { return std::exp(kernel_exponent(beta, x, r) - hmax); }, 1.0,
        r_hi, rel_tol);
    const double log_b =
        piece_b > 0.0 ? hmax + std::log(piece_b) : -std::numeric_limits<double>::infinity();

    // log-sum-exp of the two pieces.
    const double m = std::max(log_a, log_b);
    if (!std::isfinite(m))
        throw numerical_error("log_kb_kernel: integral evaluated to zero");
    return m + std::log(std::exp(log_a - m) + std::exp(log_b - m));
}

} // namespace qslab::quad
