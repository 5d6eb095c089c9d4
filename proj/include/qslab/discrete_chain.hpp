#pragma once

#include "qslab/matrix.hpp"

#include <cstdint>
#include <vector>

namespace qslab::chain {

// Finite-state discrete-time Markov chains with state-dependent killing.
// One transition: from state x, kill with probability kappa[x]; otherwise
// move according to row x of Q. The survival-and-move kernel is the
// substochastic matrix S = diag(1 - kappa) Q.

struct KilledChain {
    std::size_t n_states;
    Matrix Q;                   // row-stochastic transition matrix
    std::vector<double> kappa;  // per-state killing probability in [0, 1]
    std::size_t x0;             // start state

    KilledChain(Matrix Q, std::vector<double> kappa, std::size_t x0);
};

// Scalar exponential envelope of the survival probability from the start
// state: c_lower * alpha^n <= P(X_n alive) <= c_upper * alpha^n for
// 1 <= n <= n_max, with alpha the spectral radius of S.
struct SurvivalEnvelope {
    double alpha;
    double c_lower;
    double c_upper;
    int n_max;
};

Matrix survival_matrix(const KilledChain& chain);

// Row x0 of S^n, i.e. the subprobability law of the surviving chain at n.
std::vector<double> survival_distribution(const KilledChain& chain, int n);

// The conditional law given survival: row x0 of S^n normalized to sum 1.
std::vector<double> conditional_distribution(const KilledChain& chain, int n);

// Total variation distance (1/2) sum |p_i - q_i|; both arguments must be
// probability vectors of equal length.
double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

double survival_probability(const KilledChain& chain, int n);

SurvivalEnvelope decay_envelope(const KilledChain& chain, int n_max);

// K(x0) = 2 c_u c_u~ / min(c_l, c_l~) for scalar envelopes (the sup over the
// Q-integral collapses). Both chains must share Q and x0.
double k_constant(const KilledChain& base, const KilledChain& tilde,
                  const SurvivalEnvelope& env_base, const SurvivalEnvelope& env_tilde);

// ||kappa - kappa~||_inf * K(x0) * min(n, 1/|alpha - alpha~|), with the
// envelopes taken over horizon n_max_envelope (default: n itself).
double prop1_bound(const KilledChain& base, const KilledChain& tilde, int n,
                   int n_max_envelope = 0);
double prop1_bound(const KilledChain& base, const KilledChain& tilde, int n,
                   const SurvivalEnvelope& env_base, const SurvivalEnvelope& env_tilde);

struct Prop1Row {
    int n;
    double tv_exact;
    double bound;
    double margin;  // bound - tv_exact
};

struct Prop1Report {
    std::vector<Prop1Row> rows;
    bool all_satisfied = false;
    bool truncated = false;  // conditioning hit a null event before n_max
    int truncated_at = 0;
};

// Exact TV between the two conditional laws against the closed-form bound,
// for every 1 <= n <= n_max.
Prop1Report verify_prop1(const KilledChain& base, const KilledChain& tilde, int n_max);

struct ChainSimResult {
    std::vector<double> conditional;  // empirical law among surviving paths
    double survival_fraction;
    std::uint64_t n_survivors;
};

// Monte-Carlo simulation of the kill-then-move mechanism; per-path
// counter-based substreams derived from (seed, path index) make the result
// independent of the thread count.
ChainSimResult simulate_chain(const KilledChain& chain, int n, std::uint64_t n_paths,
                              std::uint64_t seed, unsigned threads = 0);

} // namespace qslab::chain
