#include "qslab/discrete_chain.hpp"

#include "qslab/errors.hpp"
#include "qslab/parallel.hpp"
#include "qslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qslab::chain {

KilledChain::KilledChain(Matrix Q_, std::vector<double> kappa_, std::size_t x0_)
    : n_states(Q_.rows()), Q(std::move(Q_)), kappa(std::move(kappa_)), x0(x0_) {
    if (n_states == 0 || Q.cols() != n_states)
        throw domain_error("KilledChain: Q must be square and nonempty");
    for (std::size_t i = 0; i < n_states; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n_states; ++j) {
            if (Q(i, j) < 0.0)
                throw domain_error("KilledChain: Q entries must be nonnegative");
            row_sum += Q(i, j);
        }
        if (std::abs(row_sum - 1.0) > 1e-12)
            throw domain_error("KilledChain: row " + std::to_string(i) +
                               " of Q does not sum to 1");
    }
    if (kappa.size() != n_states)
        throw domain_error("KilledChain: kappa length does not match state count");
    for (double k : kappa)
        if (k < 0.0 || k > 1.0)
            throw domain_error("KilledChain: kappa entries must lie in [0, 1]");
    if (x0 >= n_states) throw domain_error("KilledChain: start state out of range");
}

Matrix survival_matrix(const KilledChain& chain) {
    Matrix s(chain.n_states, chain.n_states);
    for (std::size_t i = 0; i < chain.n_states; ++i) {
        const double g = 1.0 - chain.kappa[i];
        for (std::size_t j = 0; j < chain.n_states; ++j) s(i, j) = g * chain.Q(i, j);
    }
    return s;
}

std::vector<double> survival_distribution(const KilledChain& chain, int n) {
    if (n < 0) throw domain_error("survival_distribution: n must be >= 0");
    std::vector<double> v(chain.n_states, 0.0);
    v[chain.x0] = 1.0;
    const Matrix s = survival_matrix(chain);
    for (int step = 0; step < n; ++step) v = row_times(v, s);
    return v;
}

std::vector<double> conditional_distribution(const KilledChain& chain, int n) {
    if (n < 1) throw domain_error("conditional_distribution: n must be >= 1");
    std::vector<double> v = survival_distribution(chain, n);
    double mass = 0.0;
    for (double x : v) mass += x;
    if (!(mass > 0.0)) throw conditioning_error(0.0);
    for (double& x : v) x /= mass;
    return v;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw domain_error("tv_distance: length mismatch");
    double sp = 0.0, sq = 0.0, abs_diff = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        abs_diff += std::abs(p[i] - q[i]);
    }
    if (std::abs(sp - 1.0) > 1e-10 || std::abs(sq - 1.0) > 1e-10)
        throw domain_error("tv_distance: inputs must be normalized probability vectors");
    return 0.5 * abs_diff;
}

double survival_probability(const KilledChain& chain, int n) {
    std::vector<double> v = survival_distribution(chain, n);
    double mass = 0.0;
    for (double x : v) mass += x;
    return mass;
}

namespace {

// Perron root of the nonnegative matrix S by power iteration.
double spectral_radius(const Matrix& s, double tol = 1e-12, int max_iter = 200000) {
    const std::size_t n = s.rows();
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    double radius = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<double> y = row_times(x, s);
        double norm = 0.0;
        for (double v : y) norm += std::abs(v);
        if (norm == 0.0) return 0.0;
        for (double& v : y) v /= norm;
        if (std::abs(norm - radius) <= tol * std::max(norm, 1e-30)) return norm;
        radius = norm;
        x = std::move(y);
    }
    throw numerical_error("spectral_radius: power iteration did not converge");
}

} // namespace

SurvivalEnvelope decay_envelope(const KilledChain& chain, int n_max) {
    if (n_max < 1) throw domain_error("decay_envelope: n_max must be >= 1");

    std::vector<double> survival(static_cast<std::size_t>(n_max) + 1);
    survival[0] = 1.0;
    std::vector<double> v(chain.n_states, 0.0);
    v[chain.x0] = 1.0;
    const Matrix s = survival_matrix(chain);
    for (int n = 1; n <= n_max; ++n) {
        v = row_times(v, s);
        double mass = 0.0;
        for (double x : v) mass += x;
        survival[static_cast<std::size_t>(n)] = mass;
        if (!(mass > 0.0))
            throw degenerate_chain_error(
                "decay_envelope: survival probability hit zero at n = " +
                std::to_string(n));
    }

    SurvivalEnvelope env;
    env.alpha = spectral_radius(s);
    if (!(env.alpha > 0.0))
        throw degenerate_chain_error("decay_envelope: survival kernel has zero spectral radius");
    env.n_max = n_max;
    env.c_lower = std::numeric_limits<double>::infinity();
    env.c_upper = 0.0;
    double alpha_pow = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        alpha_pow *= env.alpha;
        const double ratio = survival[static_cast<std::size_t>(n)] / alpha_pow;
        env.c_lower = std::min(env.c_lower, ratio);
        env.c_upper = std::max(env.c_upper, ratio);
    }
    return env;
}

namespace {

void require_shared_base(const KilledChain& base, const KilledChain& tilde) {
    if (!(base.Q == tilde.Q) || base.x0 != tilde.x0)
        throw domain_error("chains must share Q and the start state (only kappa differs)");
}

double kappa_sup_diff(const KilledChain& base, const KilledChain& tilde) {
    double d = 0.0;
    for (std::size_t i = 0; i < base.n_states; ++i)
        d = std::max(d, std::abs(base.kappa[i] - tilde.kappa[i]));
    return d;
}

} // namespace

double k_constant(const KilledChain& base, const KilledChain& tilde,
                  const SurvivalEnvelope& env_base, const SurvivalEnvelope& env_tilde) {
    require_shared_base(base, tilde);
    const double c_min = std::min(env_base.c_lower, env_tilde.c_lower);
    if (!(c_min > 0.0)) throw domain_error("k_constant: lower envelope constant must be positive");
    return 2.0 * env_tilde.c_upper * env_base.c_upper / c_min;
}

double prop1_bound(const KilledChain& base, const KilledChain& tilde, int n,
                   const SurvivalEnvelope& env_base, const SurvivalEnvelope& env_tilde) {
    if (n < 1) throw domain_error("prop1_bound: n must be >= 1");
    const double k = k_constant(base, tilde, env_base, env_tilde);
    const double diff = kappa_sup_diff(base, tilde);
    const double alpha_gap = std::abs(env_base.alpha - env_tilde.alpha);
    const double horizon =
        alpha_gap == 0.0 ? static_cast<double>(n)
                         : std::min(static_cast<double>(n), 1.0 / alpha_gap);
    return diff * k * horizon;
}

double prop1_bound(const KilledChain& base, const KilledChain& tilde, int n,
                   int n_max_envelope) {
    if (n < 1) throw domain_error("prop1_bound: n must be >= 1");
    const int horizon = n_max_envelope > 0 ? n_max_envelope : n;
    return prop1_bound(base, tilde, n, decay_envelope(base, horizon),
                       decay_envelope(tilde, horizon));
}

Prop1Report verify_prop1(const KilledChain& base, const KilledChain& tilde, int n_max) {
    require_shared_base(base, tilde);
    if (n_max < 1) throw domain_error("verify_prop1: n_max must be >= 1");

    const SurvivalEnvelope env_base = decay_envelope(base, n_max);
    const SurvivalEnvelope env_tilde = decay_envelope(tilde, n_max);

    Prop1Report report;
    report.rows.reserve(static_cast<std::size_t>(n_max));
    const Matrix s_base = survival_matrix(base);
    const Matrix s_tilde = survival_matrix(tilde);
    std::vector<double> v_base(base.n_states, 0.0), v_tilde(tilde.n_states, 0.0);
    v_base[base.x0] = 1.0;
    v_tilde[tilde.x0] = 1.0;

    bool all_ok = true;
    for (int n = 1; n <= n_max; ++n) {
        v_base = row_times(v_base, s_base);
        v_tilde = row_times(v_tilde, s_tilde);
        double mass_base = 0.0, mass_tilde = 0.0;
        for (double x : v_base) mass_base += x;
        for (double x : v_tilde) mass_tilde += x;
        if (!(mass_base > 0.0) || !(mass_tilde > 0.0)) {
            report.truncated = true;
            report.truncated_at = n;
            break;
        }
        std::vector<double> p = v_base, q = v_tilde;
        for (double& x : p) x /= mass_base;
        for (double& x : q) x /= mass_tilde;

        Prop1Row row;
        row.n = n;
        row.tv_exact = tv_distance(p, q);
        row.bound = prop1_bound(base, tilde, n, env_base, env_tilde);
        row.margin = row.bound - row.tv_exact;
        all_ok = all_ok && row.margin >= 0.0;
        report.rows.push_back(row);
    }
    report.all_satisfied = all_ok && !report.rows.empty();
    return report;
}

ChainSimResult simulate_chain(const KilledChain& chain, int n, std::uint64_t n_paths,
                              std::uint64_t seed, unsigned threads) {
    if (n < 0) throw domain_error("simulate_chain: n must be >= 0");
    if (n_paths < 1) throw domain_error("simulate_chain: need at least one path");

    constexpr std::uint8_t kDead = 0xFF;
    if (chain.n_states >= kDead)
        throw domain_error("simulate_chain: too many states for the path encoding");

    std::vector<std::uint8_t> outcome(n_paths, kDead);
    parallel_for(n_paths, threads, [&](std::size_t path) {
        PhiloxStream rng(seed, path);
        std::size_t state = chain.x0;
        bool alive = true;
        for (int step = 0; step < n && alive; ++step) {
            const double u = rng.uniform01();
            if (u <= chain.kappa[state]) {
                alive = false;
                break;
            }
            const double move = rng.uniform01();
            double cum = 0.0;
            std::size_t next = chain.n_states - 1;
            for (std::size_t j = 0; j < chain.n_states; ++j) {
                cum += chain.Q(state, j);
                if (move <= cum) {
                    next = j;
                    break;
                }
            }
            state = next;
        }
        if (alive) outcome[path] = static_cast<std::uint8_t>(state);
    });

    std::vector<std::uint64_t> counts(chain.n_states, 0);
    std::uint64_t survivors = 0;
    for (std::uint8_t o : outcome) {
        if (o != kDead) {
            ++counts[o];
            ++survivors;
        }
    }

    ChainSimResult result;
    result.n_survivors = survivors;
    result.survival_fraction =
        static_cast<double>(survivors) / static_cast<double>(n_paths);
    if (survivors == 0) throw conditioning_error(0.0);
    result.conditional.resize(chain.n_states);
    for (std::size_t j = 0; j < chain.n_states; ++j)
        result.conditional[j] =
            static_cast<double>(counts[j]) / static_cast<double>(survivors);
    return result;
}

} // namespace qslab::chain
