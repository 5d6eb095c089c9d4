#pragma once

#include <functional>

namespace qslab::quad {

// Adaptive Simpson with Richardson correction. The tolerance is relative to
// the first whole-interval estimate. Throws numerical_error if the recursion
// depth budget is exhausted before the local error test is met.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth = 60);

// log of K_beta(x) := integral over r in (0, inf) of r^(beta-1) exp(-r^2 - sqrt(2) x r) dr.
//
// The r^(beta-1) endpoint singularity (beta < 1) is removed by the
// substitution r = u^q with q = max(1, 2/beta); the semi-infinite part is
// truncated where the integrand has decayed by e^-60 from its peak and is
// evaluated in log scale so large beta cannot overflow. Truncation past
// max_range raises numerical_error.
double log_kb_kernel(double beta, double x, double rel_tol, double max_range);

} // namespace qslab::quad
