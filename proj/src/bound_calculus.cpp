#include "qslab/bound_calculus.hpp"

#include "qslab/errors.hpp"
#include "qslab/quadrature.hpp"
#include "qslab/rng.hpp"

#include <cmath>
#include <numbers>

namespace qslab::bounds {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectralGapData::SpectralGapData(double l0, double l1)
    : lambda0(l0), lambda1(l1), nu(l1 - l0) {
    if (!(nu > 0.0))
        throw domain_error("SpectralGapData: spectral gap nu = lambda1 - lambda0 must be positive");
}

PerturbationData::PerturbationData(double h_opnorm_, double h_phi_norm_,
                                   std::optional<double> h_phi_centered_norm_)
    : h_opnorm(h_opnorm_), h_phi_norm(h_phi_norm_),
      h_phi_centered_norm(h_phi_centered_norm_) {
    if (h_opnorm < 0.0 || h_phi_norm < 0.0)
        throw domain_error("PerturbationData: norms must be nonnegative");
    if (h_phi_centered_norm) {
        if (*h_phi_centered_norm < 0.0)
            throw domain_error("PerturbationData: centered norm must be nonnegative");
        if (*h_phi_centered_norm > h_phi_norm * (1.0 + 1e-12) + 1e-300)
            throw domain_error(
                "PerturbationData: centered norm cannot exceed ||H phi||");
    }
}

NormalizationData::NormalizationData(double Z_, double Lambda_, double eps_)
    : Z(Z_), Lambda(Lambda_), eps(eps_) {
    if (!(Z > 0.0) || !(Lambda > 0.0))
        throw domain_error("NormalizationData: Z and Lambda must be positive");
    if (eps < 0.0)
        throw domain_error("NormalizationData: eps must be nonnegative");
    if (!(eps < 1.0 / (Lambda * Z)))
        throw assumption_error("eps < 1/(Lambda Z)");
}

std::pair<double, double> weyl_interval(double lambda_j, double h_opnorm) {
    if (h_opnorm < 0.0)
        throw domain_error("weyl_interval: ||H|| must be nonnegative");
    return {lambda_j - h_opnorm, lambda_j + h_opnorm};
}

double eigenfunction_bound(const SpectralGapData& gap, const PerturbationData& pert) {
    if (!(pert.h_opnorm < 0.5 * gap.nu))
        throw assumption_error("‖H‖ < ν/2");
    const double numerator =
        pert.h_phi_centered_norm ? *pert.h_phi_centered_norm : pert.h_phi_norm;
    return numerator / (gap.nu - 2.0 * pert.h_opnorm);
}

double davis_kahan_bound(const SpectralGapData& gap, double h_phi_norm) {
    if (!(gap.nu > 0.0))
        throw domain_error("davis_kahan_bound: nu must be positive");
    if (h_phi_norm < 0.0)
        throw domain_error("davis_kahan_bound: ||H phi|| must be nonnegative");
    return 2.0 * std::sqrt(2.0) * h_phi_norm / gap.nu;
}

double l1_from_l2(double Lambda, double l2_dist) {
    if (!(Lambda > 0.0) || l2_dist < 0.0)
        throw domain_error("l1_from_l2: Lambda must be positive and l2_dist nonnegative");
    return Lambda * l2_dist;
}

double normalization_shift(const NormalizationData& nd) {
    return nd.Z * nd.Z * nd.Lambda / (1.0 - nd.Lambda * nd.Z * nd.eps);
}

L1DensityBound l1_density_bound(const NormalizationData& nd) {
    const double c = normalization_shift(nd);
    L1DensityBound out;
    out.l2_unnormalized = nd.eps * (nd.Z + c);
    out.l1_bound = nd.Lambda * out.l2_unnormalized;
    return out;
}

double truncation_eigfun_bound(double delta, double hm_phi0_norm,
                               std::optional<double> rho_lower) {
    if (!(delta > 0.0))
        throw domain_error("truncation_eigfun_bound: delta must be positive");
    if (hm_phi0_norm < 0.0)
        throw domain_error("truncation_eigfun_bound: ||H_M phi_0|| must be nonnegative");
    double prefactor = std::sqrt(2.0);
    if (rho_lower) {
        if (*rho_lower < 0.0 || *rho_lower > 1.0)
            throw domain_error("truncation_eigfun_bound: rho_lower must be in [0, 1]");
        prefactor = std::sqrt(2.0) / std::sqrt(1.0 + *rho_lower);
    }
    return prefactor * hm_phi0_norm / delta;
}

double hm_phi0_norm(double M, double quad_rel_tol) {
    if (M < 0.0) throw domain_error("hm_phi0_norm: M must be >= 0");
    const double c_sq = std::sqrt(3.0 / (2.0 * kPi));
    const double lo = std::sqrt(M);
    // 12 standard deviations of the exp(-3x^2/2) weight pushes the
    // truncation error below 1e-15 relative.
    const double hi = lo + 12.0 / std::sqrt(3.0);
    const double integral = quad::adaptive_simpson(
        [&](double x) {
            const double w = x * x - M;
            return w * w * std::exp(-1.5 * x * x);
        },
        lo, hi, quad_rel_tol);
    return std::sqrt(2.0 * c_sq * integral);
}

OuConstants ou_constants(double delta) {
    if (!(delta > 0.0)) throw domain_error("ou_constants: delta must be positive");
    OuConstants oc;
    oc.Z = std::pow(2.0 / (3.0 * kPi), 0.25);
    oc.c2 = 315.0 / (32.0 * delta);
    const double two_pi_q = std::pow(2.0 * kPi, 0.25);
    oc.c3 = oc.Z * oc.c2 * two_pi_q * (1.0 + 2.0 * oc.Z * two_pi_q);
    oc.M_min = std::log(2.0 * two_pi_q * oc.Z * oc.c2);
    return oc;
}

namespace {

Matrix random_symmetric(int dim, PhiloxStream& rng, bool psd) {
    const auto n = static_cast<std::size_t>(dim);
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = 2.0 * rng.uniform01() - 1.0;
    Matrix s(n, n);
    if (psd) {
        // B^T B is symmetric positive semi-definite.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += b(k, i) * b(k, j);
                s(i, j) = acc;
            }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double v = 0.5 * (b(i, j) + b(j, i));
                s(i, j) = v;
                s(j, i) = v;
            }
    }
    return s;
}

double ground_vector_distance(const SymmetricEigen& base, const SymmetricEigen& pert) {
    const std::size_t n = base.values.size();
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += base.vectors(i, 0) * pert.vectors(i, 0);
    const double sign = dot >= 0.0 ? 1.0 : -1.0;  // align so <v0, v0_hat> >= 0
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = base.vectors(i, 0) - sign * pert.vectors(i, 0);
        dist_sq += d * d;
    }
    return std::sqrt(dist_sq);
}

} // namespace

OracleInstance finite_dim_oracle(int dim, std::uint64_t seed) {
    if (dim < 2 || dim > 12)
        throw domain_error("finite_dim_oracle: dim must be in 2..12");
    PhiloxStream rng(seed, 0xB0);
    const auto n = static_cast<std::size_t>(dim);

    constexpr int kMaxRetries = 64;
    constexpr double kMinGap = 0.02;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        const Matrix a = random_symmetric(dim, rng, true);
        const SymmetricEigen ea = jacobi_eigensolve(a);
        const double nu = ea.values[1] - ea.values[0];
        if (nu < kMinGap) continue;  // ground eigenvalue effectively degenerate

        Matrix h = random_symmetric(dim, rng, false);
        const SymmetricEigen eh = jacobi_eigensolve(h);
        double h_norm = 0.0;
        for (double v : eh.values) h_norm = std::max(h_norm, std::abs(v));
        if (h_norm == 0.0) continue;
        // Rescale so ||H|| = theta * nu/2 with theta strictly inside (0, 1).
        const double theta = 0.05 + 0.9 * rng.uniform01();
        const double scale = theta * 0.5 * nu / h_norm;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h(i, j) *= scale;
        const double h_opnorm = theta * 0.5 * nu;

        std::vector<double> h_phi(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h_phi[i] += h(i, j) * ea.vectors(j, 0);
        double h_phi_norm_sq = 0.0, proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            h_phi_norm_sq += h_phi[i] * h_phi[i];
            proj += h_phi[i] * ea.vectors(i, 0);
        }
        double centered_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = h_phi[i] - proj * ea.vectors(i, 0);
            centered_sq += c * c;
        }

        Matrix a_pert = a;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a_pert(i, j) += h(i, j);
        const SymmetricEigen ep = jacobi_eigensolve(a_pert);

        OracleInstance out{
            SpectralGapData(ea.values[0], ea.values[1]),
            PerturbationData(h_opnorm, std::sqrt(h_phi_norm_sq),
                             std::sqrt(std::max(centered_sq, 0.0))),
            ground_vector_distance(ea, ep),
            {}};
        out.exact_eigval_shifts.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            out.exact_eigval_shifts.push_back(std::abs(ep.values[j] - ea.values[j]));
        return out;
    }
    throw numerical_error("finite_dim_oracle: could not generate an instance with a "
                          "simple ground eigenvalue");
}

} // namespace qslab::bounds
