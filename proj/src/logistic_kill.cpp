#include "qslab/logistic_kill.hpp"

#include "qslab/bound_calculus.hpp"
#include "qslab/errors.hpp"
#include "qslab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qslab::logistic {

Dataset::Dataset(Matrix X_, std::vector<int> y_) : X(std::move(X_)), y(std::move(y_)) {
    if (X.rows() == 0 || X.cols() == 0)
        throw domain_error("Dataset: design matrix must be nonempty");
    if (y.size() != X.rows())
        throw domain_error("Dataset: response length does not match design rows");
    for (int v : y)
        if (v != 0 && v != 1) throw domain_error("Dataset: responses must be 0 or 1");
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j)
            if (!std::isfinite(X(i, j)))
                throw domain_error("Dataset: design entries must be finite");
}

double predict_p(const std::vector<double>& x, const Dataset& data, std::size_t row) {
    if (x.size() != data.dim())
        throw domain_error("predict_p: parameter dimension does not match design");
    if (row >= data.n_obs()) throw domain_error("predict_p: row out of range");
    double z = 0.0;
    for (std::size_t j = 0; j < data.dim(); ++j) z += data.X(row, j) * x[j];
    // Saturating branch avoids overflow for large |z|.
    double p;
    if (z >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        p = e / (1.0 + e);
    }
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(p, std::numeric_limits<double>::min(), hi);
}

double kappa_raw(const std::vector<double>& x, const Dataset& data) {
    const std::size_t n = data.n_obs();
    const std::size_t d = data.dim();
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = predict_p(x, data, i);

    double grad_sq = 0.0;
    double curvature = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double xij = data.X(i, j);
            g += (static_cast<double>(data.y[i]) - p[i]) * xij;
            curvature += p[i] * (1.0 - p[i]) * xij * xij;
        }
        grad_sq += g * g;
    }
    const double value = 0.5 * (grad_sq - curvature);
    if (!std::isfinite(value))
        throw numerical_error("kappa_raw: non-finite intermediate value");
    return value;
}

double calibrate_phi(const Dataset& data, const Grid& grid) {
    if (grid.empty()) throw domain_error("calibrate_phi: grid must be nonempty");
    double phi = std::numeric_limits<double>::infinity();
    for (const auto& point : grid) phi = std::min(phi, kappa_raw(point, data));
    return phi;
}

double KappaField::kappa(const std::vector<double>& x) const {
    return kappa_raw(x, data) - phi;
}

KappaField make_field(const Dataset& data, Grid grid) {
    const double phi = calibrate_phi(data, grid);
    return KappaField{data, phi, std::move(grid)};
}

double sup_diff(const KappaField& base, const KappaField& perturbed, const Grid& grid,
                unsigned threads) {
    if (grid != base.calibration_grid || grid != perturbed.calibration_grid)
        throw domain_error("sup_diff: fields do not share the supplied grid");
    std::vector<double> diff(grid.size(), 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        diff[i] = std::abs(base.kappa(grid[i]) - perturbed.kappa(grid[i]));
    });
    double sup = 0.0;
    for (double v : diff) sup = std::max(sup, v);
    return sup;
}

Dataset perturb_labels(const Dataset& data, const std::vector<std::size_t>& indices) {
    std::vector<int> y = data.y;
    for (std::size_t idx : indices) {
        if (idx >= y.size()) throw domain_error("perturb_labels: index out of range");
        y[idx] = 1 - y[idx];
    }
    return Dataset(data.X, std::move(y));
}

RobustnessReport robustness_report(const KappaField& base, const KappaField& perturbed,
                                   double nu, const Grid& grid) {
    if (!(nu > 0.0)) throw domain_error("robustness_report: nu must be positive");
    const double h_norm = sup_diff(base, perturbed, grid);
    RobustnessReport report;
    report.sup_diff = h_norm;
    report.assumption_ok = h_norm < 0.5 * nu;
    // ||H phi|| <= ||H|| ||phi|| = ||H|| stands in for the unknown ||H phi||.
    const bounds::SpectralGapData gap(0.0, nu);
    report.main_bound =
        bounds::eigenfunction_bound(gap, bounds::PerturbationData(h_norm, h_norm));
    report.dk_bound = bounds::davis_kahan_bound(gap, h_norm);
    return report;
}

} // namespace qslab::logistic
