#include "qslab/cli.hpp"

#include "qslab/bound_calculus.hpp"
#include "qslab/discrete_chain.hpp"
#include "qslab/errors.hpp"
#include "qslab/killed_diffusion.hpp"
#include "qslab/logistic_kill.hpp"
#include "qslab/parallel.hpp"
#include "qslab/spectral_shooting.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace qslab::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// 17 significant digits guarantee binary round-trip of doubles.
std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

json make_manifest(const std::string& subcommand, const json& parameters,
                   std::uint64_t seed) {
    return json{{"subcommand", subcommand},
                {"parameters", parameters},
                {"seed", seed},
                {"artifact_version", kVersion},
                {"timestamp", iso_timestamp()}};
}

// Writes the payload to an explicit path (with an accompanying
// <path>.manifest.json) or to the fallback stream when no path was given.
void emit(const std::string& payload, const std::string& path, std::ostream& fallback,
          const json& manifest) {
    if (path.empty()) {
        fallback << payload;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw domain_error("cannot open output file: " + path);
    f << payload;
    std::ofstream mf(path + ".manifest.json", std::ios::binary);
    if (!mf) throw domain_error("cannot open manifest file: " + path + ".manifest.json");
    mf << manifest.dump(2) << "\n";
}

spectral::EigenSolveConfig solver_config(double M, double ode_step, double quad_tol,
                                         double root_tol, double quad_range) {
    spectral::EigenSolveConfig cfg = spectral::EigenSolveConfig::for_truncation(M);
    if (ode_step > 0.0) cfg.ode_step = ode_step;
    if (quad_tol > 0.0) cfg.quad_rel_tol = quad_tol;
    if (root_tol > 0.0) cfg.root_abs_tol = root_tol;
    if (quad_range > 0.0) cfg.max_quad_range = quad_range;
    cfg.validate();
    return cfg;
}

logistic::Dataset load_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open dataset: " + path);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw domain_error("dataset: non-numeric cell '" + cell + "'");
            }
        }
        if (fields.size() < 2)
            throw domain_error("dataset: each row needs a response and at least one covariate");
        if (fields[0] != 0.0 && fields[0] != 1.0)
            throw domain_error("dataset: first column must be a 0/1 response");
        y.push_back(static_cast<int>(fields[0]));
        rows.emplace_back(fields.begin() + 1, fields.end());
    }
    if (rows.empty()) throw domain_error("dataset: no rows in " + path);
    const std::size_t d = rows.front().size();
    Matrix x(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw domain_error("dataset: ragged rows");
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rows[i][j];
    }
    return logistic::Dataset(std::move(x), std::move(y));
}

// Grid spec "min:max:points", replicated across the parameter dimensions.
logistic::Grid build_grid(const std::string& spec, std::size_t dim) {
    double lo, hi;
    int points;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &points) != 3)
        throw domain_error("grid spec must be min:max:points");
    if (!(lo < hi) || points < 1) throw domain_error("grid spec: need min < max, points >= 1");
    double total = 1.0;
    for (std::size_t j = 0; j < dim; ++j) total *= points;
    if (total > 200000.0) throw domain_error("grid spec: product grid too large");

    std::vector<double> axis(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        axis[static_cast<std::size_t>(i)] =
            points == 1 ? 0.5 * (lo + hi)
                        : lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(points - 1);
    logistic::Grid grid;
    grid.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
        std::vector<double> point(dim);
        for (std::size_t j = 0; j < dim; ++j) point[j] = axis[idx[j]];
        grid.push_back(std::move(point));
        std::size_t j = 0;
        for (; j < dim; ++j) {
            if (++idx[j] < axis.size()) break;
            idx[j] = 0;
        }
        if (j == dim) break;
    }
    return grid;
}

std::vector<std::size_t> parse_index_list(const std::string& csv) {
    std::vector<std::size_t> out;
    if (csv.empty()) return out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            const long v = std::stol(cell);
            if (v < 0) throw domain_error("flip indices must be nonnegative");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const domain_error&) {
            throw;
        } catch (const std::exception&) {
            throw domain_error("flip list: non-integer entry '" + cell + "'");
        }
    }
    return out;
}

struct CurveTable {
    std::vector<double> y;
    std::vector<double> log_pi;
};

CurveTable load_log_density_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open target grid: " + path);
    CurveTable table;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        double a, b;
        if (std::sscanf(line.c_str(), "%lf,%lf", &a, &b) != 2)
            throw domain_error("target grid: expected 'y,log_pi' rows");
        table.y.push_back(a);
        table.log_pi.push_back(b);
    }
    if (table.y.size() < 3)
        throw domain_error("target grid: need at least three rows");
    const double h = table.y[1] - table.y[0];
    for (std::size_t i = 0; i + 1 < table.y.size(); ++i)
        if (std::abs((table.y[i + 1] - table.y[i]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw domain_error("target grid: y column must be uniformly spaced");
    return table;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
    CLI::App app{"qslab: quasi-stationary distributions of killed Markov processes"};
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (default: QSLAB_THREADS or hardware)");

    // Deferred actions keep parsing and execution separate; CLI11 fills the
    // bound locals first, then the chosen action runs.
    std::function<void()> action;

    // solver knobs shared by the spectral commands
    struct SpectralKnobs {
        double ode_step = 0.0, quad_tol = 0.0, root_tol = 0.0, quad_range = 0.0;
        void attach(CLI::App* cmd) {
            cmd->add_option("--ode-step", ode_step, "phase-ODE step override");
            cmd->add_option("--quad-tol", quad_tol, "quadrature tolerance override");
            cmd->add_option("--root-tol", root_tol, "bisection tolerance override");
            cmd->add_option("--max-quad-range", quad_range, "quadrature cutoff override");
        }
    };

    // --- spectrum ---------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("spectrum", "first eigenvalues of the truncated generator");
        auto M = std::make_shared<double>(0.0);
        auto count = std::make_shared<int>(1);
        auto out_path = std::make_shared<std::string>();
        auto knobs = std::make_shared<SpectralKnobs>();
        cmd->add_option("--M", *M, "truncation level")->required();
        cmd->add_option("--count", *count, "number of eigenvalues")->required();
        cmd->add_option("--out", *out_path, "output CSV path");
        knobs->attach(cmd);
        cmd->callback([&, M, count, out_path, knobs]() {
            action = [&, M, count, out_path, knobs]() {
                const auto cfg = solver_config(*M, knobs->ode_step, knobs->quad_tol,
                                               knobs->root_tol, knobs->quad_range);
                const auto result = spectral::spectrum(*M, *count, cfg, threads);
                std::string csv = "n,eigenvalue\n";
                for (const auto& [n, lambda] : result.eigenvalues)
                    csv += std::to_string(n) + "," + g17(lambda) + "\n";
                emit(csv, *out_path, out,
                     make_manifest("spectrum", {{"M", *M}, {"count", *count}}, 0));
            };
        });
    }

    // --- s-curve ----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("s-curve", "boundary mismatch s_M over a lambda grid");
        auto M = std::make_shared<double>(0.0);
        auto lmin = std::make_shared<double>(0.0);
        auto lmax = std::make_shared<double>(0.0);
        auto steps = std::make_shared<int>(100);
        auto out_path = std::make_shared<std::string>();
        auto knobs = std::make_shared<SpectralKnobs>();
        cmd->add_option("--M", *M, "truncation level")->required();
        cmd->add_option("--lambda-min", *lmin)->required();
        cmd->add_option("--lambda-max", *lmax)->required();
        cmd->add_option("--steps", *steps)->required();
        cmd->add_option("--out", *out_path, "output CSV path");
        knobs->attach(cmd);
        cmd->callback([&, M, lmin, lmax, steps, out_path, knobs]() {
            action = [&, M, lmin, lmax, steps, out_path, knobs]() {
                const auto cfg = solver_config(*M, knobs->ode_step, knobs->quad_tol,
                                               knobs->root_tol, knobs->quad_range);
                const auto curve =
                    spectral::sample_s_curve(*M, *lmin, *lmax, *steps, cfg, threads);
                std::string csv = "lambda,s_value\n";
                for (const auto& [l, s] : curve) csv += g17(l) + "," + g17(s) + "\n";
                emit(csv, *out_path, out,
                     make_manifest("s-curve",
                                   {{"M", *M},
                                    {"lambda_min", *lmin},
                                    {"lambda_max", *lmax},
                                    {"steps", *steps}},
                                   0));
            };
        });
    }

    // --- figure -----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("figure", "s-curve data for the M in {2, 10, 40} plots");
        auto fig = std::make_shared<int>(0);
        auto out_path = std::make_shared<std::string>();
        cmd->add_option("--fig", *fig, "figure index 1..3")->required();
        cmd->add_option("--out", *out_path, "output CSV path");
        cmd->callback([&, fig, out_path]() {
            action = [&, fig, out_path]() {
                double M;
                switch (*fig) {
                    case 1: M = 2.0; break;
                    case 2: M = 10.0; break;
                    case 3: M = 40.0; break;
                    default: throw domain_error("figure: --fig must be 1, 2 or 3");
                }
                const auto cfg = spectral::EigenSolveConfig::for_truncation(M);
                const auto curve = spectral::sample_s_curve(
                    M, 0.05, std::min(M, 6.0), 400, cfg, threads);
                std::string csv = "lambda,s_value\n";
                for (const auto& [l, s] : curve) csv += g17(l) + "," + g17(s) + "\n";
                emit(csv, *out_path, out, make_manifest("figure", {{"fig", *fig}}, 0));
            };
        });
    }

    // --- bounds (main | ou-constants | oracle) -----------------------------
    auto run_bounds_main = [&](double nu, double hnorm, double hphi,
                               const std::string& out_path) {
        const bounds::SpectralGapData gap(0.0, nu);
        const bounds::PerturbationData pert(hnorm, hphi);
        json report{{"nu", nu},
                    {"h_opnorm", hnorm},
                    {"h_phi_norm", hphi},
                    {"main_bound", bounds::eigenfunction_bound(gap, pert)},
                    {"dk_bound", bounds::davis_kahan_bound(gap, hphi)},
                    {"weyl_halfwidth", hnorm}};
        emit(report.dump(2) + "\n", out_path, out,
             make_manifest("bounds main", {{"nu", nu}, {"hnorm", hnorm}, {"hphi", hphi}}, 0));
    };
    auto run_ou_constants = [&](double delta, const std::string& out_path) {
        const auto oc = bounds::ou_constants(delta);
        json report{{"delta", delta}, {"Z", oc.Z}, {"c2", oc.c2}, {"c3", oc.c3},
                    {"M_min", oc.M_min}};
        emit(report.dump(2) + "\n", out_path, out,
             make_manifest("ou-constants", {{"delta", delta}}, 0));
    };
    auto run_oracle = [&](int dim, int seeds, const std::string& out_path) {
        if (seeds < 1) throw domain_error("oracle: --seeds must be >= 1");
        std::string csv = "seed,exact_dist,main_bound,dk_bound,weyl_max_shift\n";
        for (int s = 1; s <= seeds; ++s) {
            const auto inst = bounds::finite_dim_oracle(dim, static_cast<std::uint64_t>(s));
            double max_shift = 0.0;
            for (double v : inst.exact_eigval_shifts) max_shift = std::max(max_shift, v);
            csv += std::to_string(s) + "," + g17(inst.exact_eigvec_dist) + "," +
                   g17(bounds::eigenfunction_bound(inst.gap, inst.pert)) + "," +
                   g17(bounds::davis_kahan_bound(inst.gap, inst.pert.h_phi_norm)) + "," +
                   g17(max_shift) + "\n";
        }
        emit(csv, out_path, out,
             make_manifest("oracle", {{"dim", dim}, {"seeds", seeds}}, 0));
    };

    {
        auto* cmd = app.add_subcommand("bounds", "closed-form perturbation bounds");
        cmd->require_subcommand(1);

        auto* main_cmd = cmd->add_subcommand("main", "eigenfunction and sin-theta bounds");
        auto nu = std::make_shared<double>(0.0);
        auto hnorm = std::make_shared<double>(0.0);
        auto hphi = std::make_shared<double>(0.0);
        auto main_out = std::make_shared<std::string>();
        main_cmd->add_option("--nu", *nu, "spectral gap")->required();
        main_cmd->add_option("--hnorm", *hnorm, "operator norm of H")->required();
        main_cmd->add_option("--hphi", *hphi, "norm of H phi")->required();
        main_cmd->add_option("--out", *main_out, "output JSON path");
        main_cmd->callback([&, nu, hnorm, hphi, main_out]() {
            action = [&, nu, hnorm, hphi, main_out]() {
                run_bounds_main(*nu, *hnorm, *hphi, *main_out);
            };
        });

        auto* oc_cmd = cmd->add_subcommand("ou-constants", "constants of the truncation example");
        auto delta = std::make_shared<double>(0.0);
        auto oc_out = std::make_shared<std::string>();
        oc_cmd->add_option("--delta", *delta, "spectral separation delta")->required();
        oc_cmd->add_option("--out", *oc_out, "output JSON path");
        oc_cmd->callback([&, delta, oc_out]() {
            action = [&, delta, oc_out]() { run_ou_constants(*delta, *oc_out); };
        });

        auto* or_cmd = cmd->add_subcommand("oracle", "random-instance bound certification");
        auto dim = std::make_shared<int>(6);
        auto seeds = std::make_shared<int>(10);
        auto or_out = std::make_shared<std::string>();
        or_cmd->add_option("--dim", *dim, "matrix dimension 2..12")->required();
        or_cmd->add_option("--seeds", *seeds, "number of seeded instances")->required();
        or_cmd->add_option("--out", *or_out, "output CSV path");
        or_cmd->callback([&, dim, seeds, or_out]() {
            action = [&, dim, seeds, or_out]() { run_oracle(*dim, *seeds, *or_out); };
        });
    }
    {
        // Top-level aliases for the two scalar report commands.
        auto* cmd = app.add_subcommand("ou-constants", "constants of the truncation example");
        auto delta = std::make_shared<double>(0.0);
        auto oc_out = std::make_shared<std::string>();
        cmd->add_option("--delta", *delta, "spectral separation delta")->required();
        cmd->add_option("--out", *oc_out, "output JSON path");
        cmd->callback([&, delta, oc_out]() {
            action = [&, delta, oc_out]() { run_ou_constants(*delta, *oc_out); };
        });
    }
    {
        auto* cmd = app.add_subcommand("oracle", "random-instance bound certification");
        auto dim = std::make_shared<int>(6);
        auto seeds = std::make_shared<int>(10);
        auto or_out = std::make_shared<std::string>();
        cmd->add_option("--dim", *dim, "matrix dimension 2..12")->required();
        cmd->add_option("--seeds", *seeds, "number of seeded instances")->required();
        cmd->add_option("--out", *or_out, "output CSV path");
        cmd->callback([&, dim, seeds, or_out]() {
            action = [&, dim, seeds, or_out]() { run_oracle(*dim, *seeds, *or_out); };
        });
    }

    // --- chain verify -------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("chain", "discrete-time killed chains");
        cmd->require_subcommand(1);
        auto* verify = cmd->add_subcommand("verify", "exact TV against the closed-form bound");
        auto config_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        verify->add_option("--config", *config_path, "JSON chain-pair description")->required();
        verify->add_option("--out", *out_path, "output CSV path");
        verify->callback([&, config_path, out_path]() {
            action = [&, config_path, out_path]() {
                std::ifstream f(*config_path);
                if (!f) throw domain_error("cannot open config: " + *config_path);
                json cfg;
                try {
                    f >> cfg;
                } catch (const json::exception& e) {
                    throw domain_error(std::string("config parse error: ") + e.what());
                }
                const auto rows = cfg.at("Q").get<std::vector<std::vector<double>>>();
                const auto kappa = cfg.at("kappa").get<std::vector<double>>();
                const auto kappa_tilde = cfg.at("kappa_tilde").get<std::vector<double>>();
                const auto x0 = cfg.at("x0").get<std::size_t>();
                const auto n_max = cfg.at("n_max").get<int>();
                if (rows.empty()) throw domain_error("config: empty Q");
                Matrix q(rows.size(), rows.front().size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i].size() != rows.front().size())
                        throw domain_error("config: ragged Q");
                    for (std::size_t j = 0; j < rows[i].size(); ++j) q(i, j) = rows[i][j];
                }
                const chain::KilledChain base(q, kappa, x0);
                const chain::KilledChain tilde(q, kappa_tilde, x0);
                const auto report = chain::verify_prop1(base, tilde, n_max);
                std::string csv = "n,tv_exact,bound,margin\n";
                for (const auto& row : report.rows)
                    csv += std::to_string(row.n) + "," + g17(row.tv_exact) + "," +
                           g17(row.bound) + "," + g17(row.margin) + "\n";
                emit(csv, *out_path, out,
                     make_manifest("chain verify", {{"config", *config_path}, {"n_max", n_max}}, 0));
                if (report.truncated)
                    err << "note: conditional law undefined from n = " << report.truncated_at
                        << " (zero survival mass)\n";
            };
        });
    }

    // --- simulate -----------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("simulate", "killed OU ensemble: survival curve and QSD histogram");
        struct SimArgs {
            double M = 10.0, T = 10.0, dt = 0.01, x0 = 0.0, range = 4.0;
            std::uint64_t particles = 100000, seed = 1;
            int checkpoints = 50, bins = 60;
            std::string survival_out, histogram_out;
        };
        auto a = std::make_shared<SimArgs>();
        cmd->add_option("--M", a->M, "killing truncation level")->required();
        cmd->add_option("--T", a->T, "time horizon")->required();
        cmd->add_option("--dt", a->dt, "time step")->required();
        cmd->add_option("--particles", a->particles, "ensemble size")->required();
        cmd->add_option("--seed", a->seed, "RNG seed")->required();
        cmd->add_option("--checkpoints", a->checkpoints, "survival curve checkpoints");
        cmd->add_option("--bins", a->bins, "histogram bins");
        cmd->add_option("--range", a->range, "histogram half-range around 0");
        cmd->add_option("--x0", a->x0, "initial position");
        cmd->add_option("--survival-out", a->survival_out, "survival CSV path");
        cmd->add_option("--histogram-out", a->histogram_out, "histogram CSV path");
        cmd->callback([&, a]() {
            action = [&, a]() {
                const auto dspec = diffusion::DiffusionSpec::ou();
                const auto kspec = diffusion::KillingSpec::truncated_quadratic(a->M);
                const auto record = diffusion::simulate_kill_record(
                    dspec, kspec, a->T, a->dt, a->particles, a->seed, a->x0, threads);
                const auto curve = diffusion::curve_from_record(record, a->T, a->checkpoints);
                const auto ensemble = diffusion::ensemble_from_record(record, a->T, a->seed);
                const auto hist =
                    diffusion::qsd_estimate(ensemble, a->bins, {-a->range, a->range});

                std::string survival_csv = "t,alive_fraction\n";
                for (const auto& [t, frac] : curve.points)
                    survival_csv += g17(t) + "," + g17(frac) + "\n";
                std::string hist_csv = "bin_center,density\n";
                for (std::size_t i = 0; i < hist.density.size(); ++i)
                    hist_csv += g17(hist.bin_center(i)) + "," + g17(hist.density[i]) + "\n";

                const json params{{"M", a->M},       {"T", a->T},
                                  {"dt", a->dt},     {"particles", a->particles},
                                  {"checkpoints", a->checkpoints}, {"bins", a->bins},
                                  {"range", a->range}, {"x0", a->x0}};
                json manifest = make_manifest("simulate", params, a->seed);
                manifest["fitted_rate"] = curve.fitted_rate;
                if (a->survival_out.empty() && a->histogram_out.empty()) {
                    out << survival_csv << "\n" << hist_csv;
                } else {
                    emit(survival_csv, a->survival_out, out, manifest);
                    emit(hist_csv, a->histogram_out, out, manifest);
                }
                err << "fitted_rate = " << g17(curve.fitted_rate) << "\n";
            };
        });
    }

    // --- kappa-from-target ---------------------------------------------------
    {
        auto* cmd = app.add_subcommand("kappa-from-target",
                                       "killing rate that makes a density the QSD");
        struct KtArgs {
            std::string target;
            double gridmin = -5.0, gridmax = 5.0, fd_step = 1e-4;
            int points = 101;
            std::string out_path;
        };
        auto a = std::make_shared<KtArgs>();
        cmd->add_option("--target", a->target, "ou | normal-bm | CSV of y,log_pi")->required();
        cmd->add_option("--gridmin", a->gridmin);
        cmd->add_option("--gridmax", a->gridmax);
        cmd->add_option("--points", a->points);
        cmd->add_option("--fd-step", a->fd_step, "finite-difference step");
        cmd->add_option("--out", a->out_path, "output CSV path");
        cmd->callback([&, a]() {
            action = [&, a]() {
                std::vector<double> grid;
                diffusion::KappaFromTarget result;
                if (a->target == "ou") {
                    // pi = N(0, 1/2) targeted by the OU diffusion with A = -x^2/4.
                    if (a->points < 2) throw domain_error("need at least two grid points");
                    for (int i = 0; i < a->points; ++i)
                        grid.push_back(a->gridmin + (a->gridmax - a->gridmin) *
                                                        static_cast<double>(i) /
                                                        static_cast<double>(a->points - 1));
                    result = diffusion::kappa_from_target(
                        [](double x) { return -x * x; },
                        [](double x) { return -0.25 * x * x; }, grid, a->fd_step);
                } else if (a->target == "normal-bm") {
                    // pi = N(0, 1) targeted by Brownian motion (A = 0).
                    if (a->points < 2) throw domain_error("need at least two grid points");
                    for (int i = 0; i < a->points; ++i)
                        grid.push_back(a->gridmin + (a->gridmax - a->gridmin) *
                                                        static_cast<double>(i) /
                                                        static_cast<double>(a->points - 1));
                    result = diffusion::kappa_from_target(
                        [](double x) { return -0.5 * x * x; }, [](double) { return 0.0; },
                        grid, a->fd_step);
                } else {
                    const CurveTable table = load_log_density_csv(a->target);
                    const double h = table.y[1] - table.y[0];
                    auto log_pi = [table](double x) {
                        // linear interpolation; FD at nodes with step h only
                        // touches node values, so the table is used exactly
                        const double u = (x - table.y.front()) / (table.y[1] - table.y[0]);
                        const auto n = table.y.size();
                        if (u <= 0.0) return table.log_pi.front();
                        if (u >= static_cast<double>(n - 1)) return table.log_pi.back();
                        const auto i = static_cast<std::size_t>(u);
                        const double w = u - static_cast<double>(i);
                        return (1.0 - w) * table.log_pi[i] + w * table.log_pi[i + 1];
                    };
                    grid.assign(table.y.begin() + 1, table.y.end() - 1);
                    result = diffusion::kappa_from_target(log_pi, [](double) { return 0.0; },
                                                          grid, h);
                }
                std::string csv = "y,kappa\n";
                for (std::size_t i = 0; i < grid.size(); ++i)
                    csv += g17(grid[i]) + "," + g17(result.kappa[i]) + "\n";
                json manifest = make_manifest(
                    "kappa-from-target",
                    {{"target", a->target}, {"gridmin", a->gridmin},
                     {"gridmax", a->gridmax}, {"points", a->points},
                     {"fd_step", a->fd_step}},
                    0);
                manifest["K"] = result.K;
                emit(csv, a->out_path, out, manifest);
                err << "K = " << g17(result.K) << "\n";
            };
        });
    }

    // --- logistic -------------------------------------------------------------
    {
        auto* cmd = app.add_subcommand("logistic", "logistic-regression killing rate");
        cmd->require_subcommand(1);

        auto* kcmd = cmd->add_subcommand("kappa", "calibrated killing rate on a grid");
        auto data_path = std::make_shared<std::string>();
        auto grid_spec = std::make_shared<std::string>("-5:5:21");
        auto k_out = std::make_shared<std::string>();
        kcmd->add_option("--data", *data_path, "dataset CSV (y, then covariates)")->required();
        kcmd->add_option("--grid", *grid_spec, "calibration grid min:max:points");
        kcmd->add_option("--out", *k_out, "output CSV path");
        kcmd->callback([&, data_path, grid_spec, k_out]() {
            action = [&, data_path, grid_spec, k_out]() {
                const auto data = load_dataset_csv(*data_path);
                auto grid = build_grid(*grid_spec, data.dim());
                const auto field = logistic::make_field(data, std::move(grid));
                std::string csv;
                for (std::size_t j = 0; j < data.dim(); ++j)
                    csv += "x" + std::to_string(j + 1) + ",";
                csv += "kappa\n";
                for (const auto& point : field.calibration_grid) {
                    for (double c : point) csv += g17(c) + ",";
                    csv += g17(field.kappa(point)) + "\n";
                }
                json manifest = make_manifest(
                    "logistic kappa", {{"data", *data_path}, {"grid", *grid_spec}}, 0);
                manifest["Phi"] = field.phi;
                emit(csv, *k_out, out, manifest);
                err << "Phi = " << g17(field.phi) << "\n";
            };
        });

        auto* rcmd = cmd->add_subcommand("robustness", "label-flip perturbation report");
        auto r_data = std::make_shared<std::string>();
        auto r_flips = std::make_shared<std::string>();
        auto r_nu = std::make_shared<double>(0.0);
        auto r_grid = std::make_shared<std::string>("-5:5:21");
        auto r_out = std::make_shared<std::string>();
        rcmd->add_option("--data", *r_data, "dataset CSV")->required();
        rcmd->add_option("--flips", *r_flips, "comma-separated indices to flip")->required();
        rcmd->add_option("--nu", *r_nu, "caller-supplied spectral gap")->required();
        rcmd->add_option("--grid", *r_grid, "grid min:max:points");
        rcmd->add_option("--out", *r_out, "output JSON path");
        rcmd->callback([&, r_data, r_flips, r_nu, r_grid, r_out]() {
            action = [&, r_data, r_flips, r_nu, r_grid, r_out]() {
                const auto data = load_dataset_csv(*r_data);
                const auto flips = parse_index_list(*r_flips);
                const auto grid = build_grid(*r_grid, data.dim());
                const auto base = logistic::make_field(data, grid);
                const auto perturbed =
                    logistic::make_field(logistic::perturb_labels(data, flips), grid);
                const auto report = logistic::robustness_report(base, perturbed, *r_nu, grid);
                json j{{"sup_diff", report.sup_diff},
                       {"main_bound", report.main_bound},
                       {"dk_bound", report.dk_bound},
                       {"assumption_ok", report.assumption_ok},
                       {"nu", *r_nu},
                       {"flips", flips},
                       {"phi_base", base.phi},
                       {"phi_perturbed", perturbed.phi}};
                emit(j.dump(2) + "\n", *r_out, out,
                     make_manifest("logistic robustness",
                                   {{"data", *r_data}, {"flips", *r_flips},
                                    {"nu", *r_nu}, {"grid", *r_grid}},
                                   0));
            };
        });
    }

    // argv-style parse keeps CLI11's ordering conventions out of the picture
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("qslab");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (action) action();
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace qslab::cli
