#pragma once

#include "qslab/matrix.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qslab::bounds {

// Closed-form perturbation bounds for self-adjoint operators with a spectral
// gap, plus a finite-dimensional brute-force oracle that certifies them on
// random symmetric matrix pairs.

struct SpectralGapData {
    double lambda0;
    double lambda1;
    double nu;  // lambda1 - lambda0 > 0

    SpectralGapData(double l0, double l1);
};

struct PerturbationData {
    double h_opnorm;      // operator norm of the perturbation H
    double h_phi_norm;    // ||H phi|| for the ground eigenfunction phi
    std::optional<double> h_phi_centered_norm;  // ||H phi - <H phi, phi> phi||

    PerturbationData(double h_opnorm, double h_phi_norm,
                     std::optional<double> h_phi_centered_norm = std::nullopt);
};

struct NormalizationData {
    double Z;       // un-normalized L2 norm ||phi||_2
    double Lambda;  // Gamma(R^d)^(1/2)
    double eps;     // L2 eigenfunction distance

    NormalizationData(double Z, double Lambda, double eps);
};

// Enclosure [lambda_j - ||H||, lambda_j + ||H||] of the perturbed eigenvalue.
std::pair<double, double> weyl_interval(double lambda_j, double h_opnorm);

// ||phi - phi_hat|| <= ||H phi - <H phi, phi> phi|| / (nu - 2 ||H||), valid
// under ||H|| < nu/2. Falls back to the uncentered ||H phi|| numerator when
// the centered norm is absent.
double eigenfunction_bound(const SpectralGapData& gap, const PerturbationData& pert);

// sin-theta flavour: ||phi - phi_hat|| <= 2 sqrt(2) ||H phi|| / nu.
// The caller asserts ||H|| < nu/2.
double davis_kahan_bound(const SpectralGapData& gap, double h_phi_norm);

// L1 density distance from the L2 eigenfunction distance when Gamma is
// finite: integral |pi - pi_tilde| <= Lambda * l2_dist.
double l1_from_l2(double Lambda, double l2_dist);

// Normalization-constant sensitivity C = Z^2 Lambda / (1 - Lambda Z eps),
// requiring eps < 1 / (Lambda Z).
double normalization_shift(const NormalizationData& nd);

struct L1DensityBound {
    double l1_bound;          // Lambda (Z + C) eps
    double l2_unnormalized;   // intermediate (Z + C) eps = ||phi - phi_tilde||_2 bound
};
L1DensityBound l1_density_bound(const NormalizationData& nd);

// Truncation bound sqrt(2) ||H_M phi_0|| / delta; with a lower bound rho on
// <phi_0, phi_hat_0> the sharper sqrt(2)/sqrt(1+rho) prefactor applies.
double truncation_eigfun_bound(double delta, double hm_phi0_norm,
                               std::optional<double> rho_lower = std::nullopt);

// ||H_M phi_0||_2 for the OU instance:
//   sqrt( 2 C^2 * integral_{sqrt(M)}^inf (x^2 - M)^2 exp(-3x^2/2) dx ),
// with C^2 = sqrt(3 / (2 pi)).
double hm_phi0_norm(double M, double quad_rel_tol = 1e-10);

// Constants of the OU truncation example as functions of delta.
struct OuConstants {
    double Z;      // (2 / (3 pi))^(1/4)
    double c2;     // 315 / (32 delta)
    double c3;     // Z c2 (2 pi)^(1/4) (1 + 2 Z (2 pi)^(1/4))
    double M_min;  // log(2 (2 pi)^(1/4) Z c2)
};
OuConstants ou_constants(double delta);

// A random symmetric PSD matrix with simple ground eigenvalue, a random
// symmetric H rescaled to ||H|| < nu/2, and the exact perturbed quantities
// from a dense Jacobi eigensolve. Deterministic in the seed.
struct OracleInstance {
    SpectralGapData gap;
    PerturbationData pert;
    double exact_eigvec_dist;                 // sign-aligned ||v0 - v0_hat||
    std::vector<double> exact_eigval_shifts;  // |lambda_j(A+H) - lambda_j(A)|
};
OracleInstance finite_dim_oracle(int dim, std::uint64_t seed);

} // namespace qslab::bounds
