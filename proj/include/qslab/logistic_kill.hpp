#pragma once

#include "qslab/matrix.hpp"

#include <cstddef>
#include <vector>

namespace qslab::logistic {

// Killing rate of quasi-stationary Bayesian logistic regression with flat
// prior and zero drift:
//   kappa_raw(x) = 1/2 ( sum_j [ sum_i (y_i - p_i(x)) X_ij ]^2
//                        - sum_j sum_i p_i(x)(1 - p_i(x)) X_ij^2 ),
// shifted by a calibration constant Phi so that kappa >= 0 on a grid.

struct Dataset {
    Matrix X;            // n x d design matrix
    std::vector<int> y;  // binary responses

    Dataset(Matrix X, std::vector<int> y);
    std::size_t n_obs() const { return X.rows(); }
    std::size_t dim() const { return X.cols(); }
};

using Grid = std::vector<std::vector<double>>;  // list of parameter points

struct KappaField {
    Dataset data;
    double phi;  // centering constant
    Grid calibration_grid;

    // kappa(x) = kappa_raw(x) - phi
    double kappa(const std::vector<double>& x) const;
};

// Numerically stable logistic success probability for one design row;
// clamped to the open interval (0, 1).
double predict_p(const std::vector<double>& x, const Dataset& data, std::size_t row);

double kappa_raw(const std::vector<double>& x, const Dataset& data);

// Phi = min over the grid of kappa_raw, which shifts the grid minimum of
// kappa to exactly zero.
double calibrate_phi(const Dataset& data, const Grid& grid);

KappaField make_field(const Dataset& data, Grid grid);

// max over the grid of |kappa_base - kappa_perturbed| (each field with its
// own Phi); the grid must equal both fields' calibration grids.
double sup_diff(const KappaField& base, const KappaField& perturbed, const Grid& grid,
                unsigned threads = 0);

// Copy of the dataset with the responses flipped at the given indices.
Dataset perturb_labels(const Dataset& data, const std::vector<std::size_t>& indices);

struct RobustnessReport {
    double sup_diff;    // grid estimate of ||H||
    double main_bound;  // eigenfunction bound with ||H phi|| <= ||H||
    double dk_bound;    // Davis-Kahan flavour with the same surrogate
    bool assumption_ok; // ||H|| < nu/2
};

// Bound plumbing for a caller-supplied spectral gap nu; throws the
// assumption violation when sup_diff >= nu/2.
RobustnessReport robustness_report(const KappaField& base, const KappaField& perturbed,
                                   double nu, const Grid& grid);

} // namespace qslab::logistic
