#pragma once

// Command-line front end. Exit status: 0 success, 1 usage error, 2 numerical
// failure (a JSON error report goes to stderr and to <out>.error.json).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robust_scatter/robust_scatter.hpp"
#include "robust_scatter/serialization.hpp"

namespace robust_scatter::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { estimate, simulate, master_eq, sparse_cov, clime, diagnose };

inline std::string_view to_string(Command c) {
    switch (c) {
        case Command::estimate: return "estimate";
        case Command::simulate: return "simulate";
        case Command::master_eq: return "master-eq";
        case Command::sparse_cov: return "sparse-cov";
        case Command::clime: return "clime";
        case Command::diagnose: return "diagnose";
    }
    return "unknown";
}

struct RunConfig {
    Command command = Command::estimate;
    std::string input_path;
    std::string output_path;
    std::string config_path;
    std::string kind = "tyler";
    std::string u_name = "rational";
    double alpha = 1.0;
    // distribution
    std::string family = "gaussian";
    double sigma = 0.01;
    std::string radial = "constant:1";
    std::string mean;  // comma list, or a single value broadcast to p
    std::string shape_file;
    // experiment / synthetic sizes
    std::vector<std::size_t> dims{64, 128, 256, 512};
    double ratio = 2.0;
    std::size_t reps = 50;
    std::size_t master_reps = 200;
    std::size_t p = 0;
    std::size_t n = 0;
    double gamma = 0.5;
    std::optional<std::uint64_t> seed;
    // numerics
    double tol = 1e-10;
    std::size_t max_iter = 500;
    double tol_root = 1e-3;
    double c1 = 1.0;
    double lambda = 0.1;
    double eps = 0.01;
    std::string truth_path;
    std::size_t threads = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\"'");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\"'");
    return s.substr(first, last - first + 1);
}

/// key = value lines ('#' comments) with keys family, sigma, radial, mean, shape-file.
/// Values already given on the command line win.
inline void apply_config_file(RunConfig& cfg, const std::string& path, const CLI::App& sub) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (trim(line).empty() || trim(line).front() == '[') continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::parse_error,
                path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto given = [&](const char* flag) { return sub.count(flag) > 0; };
        if (key == "family") {
            if (!given("--dist")) cfg.family = value;
        } else if (key == "sigma") {
            if (!given("--sigma")) cfg.sigma = std::stod(value);
        } else if (key == "radial") {
            if (!given("--radial")) cfg.radial = value;
        } else if (key == "mean") {
            if (!given("--mean")) {
                std::string v = value;
                if (!v.empty() && v.front() == '[') v = v.substr(1, v.size() - 2);
                cfg.mean = v;
            }
        } else if (key == "shape-file") {
            if (!given("--shape-file")) cfg.shape_file = value;
        } else {
            throw Error(ErrorCode::parse_error, path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
}

inline Vector parse_mean(const std::string& text, std::size_t p) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "bad mean entry '" + item + "'");
        }
    }
    if (values.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(p), values[0]);
    require(values.size() == p, ErrorCode::dimension_mismatch, "mean has " + std::to_string(values.size()) +
                                                                   " entries but p=" + std::to_string(p));
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(p));
}

inline DistributionSpec distribution(const RunConfig& cfg, std::size_t p) {
    DistributionSpec spec;
    spec.family = parse_family(cfg.family);
    spec.sigma_smooth = cfg.sigma;
    if (spec.family == Family::elliptical) spec.radial = parse_radial(cfg.radial);
    if (!cfg.mean.empty()) spec.mean = parse_mean(cfg.mean, p);
    if (!cfg.shape_file.empty()) {
        spec.shape = ScatterMatrix(read_matrix_csv(std::filesystem::path(cfg.shape_file)));
        require(spec.shape->p() == p, ErrorCode::dimension_mismatch, "shape file dimension differs from p");
    }
    return spec;
}

inline SolverConfig solver(const RunConfig& cfg) {
    SolverConfig s;
    s.tol = cfg.tol;
    s.max_iter = cfg.max_iter;
    return s;
}

inline std::optional<UFunction> u_for(EstimatorKind kind, const RunConfig& cfg) {
    if (kind == EstimatorKind::ME || kind == EstimatorKind::MRE) return parse_u_function(cfg.u_name);
    return std::nullopt;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline Json echo(const RunConfig& cfg) {
    Json j{{"command", std::string(to_string(cfg.command))},
           {"input", cfg.input_path},
           {"out", cfg.output_path},
           {"kind", cfg.kind},
           {"u", cfg.u_name},
           {"alpha", cfg.alpha},
           {"dist", cfg.family},
           {"sigma", cfg.sigma},
           {"radial", cfg.radial},
           {"mean", cfg.mean},
           {"shape_file", cfg.shape_file},
           {"dims", cfg.dims},
           {"ratio", cfg.ratio},
           {"reps", cfg.reps},
           {"master_reps", cfg.master_reps},
           {"p", cfg.p},
           {"n", cfg.n},
           {"gamma", cfg.gamma},
           {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
           {"tol", cfg.tol},
           {"max_iter", cfg.max_iter},
           {"tol_root", cfg.tol_root},
           {"c1", cfg.c1},
           {"lambda", cfg.lambda},
           {"eps", cfg.eps},
           {"truth", cfg.truth_path},
           {"threads", cfg.threads}};
    return j;
}

/// Primary artifact (or stdout when no path is given) plus <out>.meta.json.
inline void emit(const RunConfig& cfg, const std::string& primary, const Json& summary, std::ostream& out) {
    if (cfg.output_path.empty()) {
        out << primary;
        if (!primary.empty() && primary.back() != '\n') out << '\n';
        return;
    }
    write_file_atomic(cfg.output_path, primary);
    Json meta{{"version", kVersion}, {"config", echo(cfg)}, {"result", summary}};
    write_file_atomic(cfg.output_path + ".meta.json", meta.dump(2) + "\n");
}

inline int numerical_failure(const RunConfig& cfg, const Error& e, std::ostream& err) {
    Json report{{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}},
                {"command", std::string(to_string(cfg.command))},
                {"version", kVersion}};
    err << report.dump(2) << '\n';
    if (!cfg.output_path.empty()) {
        try {
            write_file_atomic(cfg.output_path + ".error.json", report.dump(2) + "\n");
        } catch (const Error&) {
        }
    }
    return 2;
}

inline std::uint64_t require_seed(const RunConfig& cfg) {
    require(cfg.seed.has_value(), ErrorCode::invalid_argument,
            std::string(to_string(cfg.command)) + " on synthetic data requires --seed");
    return *cfg.seed;
}

inline int run_estimate(const RunConfig& cfg, std::ostream& out) {
    require(!cfg.input_path.empty(), ErrorCode::invalid_argument, "estimate requires --input");
    const Dataset data = read_dataset_csv(std::filesystem::path(cfg.input_path));
    const EstimatorKind kind = parse_kind(cfg.kind);
    const ScatterEstimate est = estimate(kind, data, u_for(kind, cfg), cfg.alpha, solver(cfg));
    if (!est.converged)
        throw Error(ErrorCode::non_convergence, "fixed-point iteration did not converge within " +
                                                    std::to_string(cfg.max_iter) + " iterations (residual " +
                                                    std::to_string(est.residual) + ")");
    const Json j = to_json(est);
    const bool csv = ends_with(cfg.output_path, ".csv");
    emit(cfg, csv ? matrix_csv(est.matrix.entries()) : j.dump(2) + "\n",
         {{"iterations", est.iterations}, {"residual", est.residual}, {"converged", est.converged}}, out);
    return 0;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out) {
    ExperimentConfig exp;
    exp.kind = parse_kind(cfg.kind);
    require(!cfg.dims.empty(), ErrorCode::invalid_argument, "--dims must not be empty");
    exp.dist = distribution(cfg, cfg.dims.front());
    if (exp.dist.mean.size() || exp.dist.shape)
        require(cfg.dims.size() == 1, ErrorCode::invalid_argument,
                "--mean vectors and --shape-file need a single entry in --dims");
    exp.u = u_for(exp.kind, cfg);
    exp.alpha = cfg.alpha;
    exp.dims = cfg.dims;
    exp.ratio = cfg.ratio;
    exp.reps = cfg.reps;
    exp.base_seed = require_seed(cfg);
    exp.solver = solver(cfg);
    exp.master_reps = cfg.master_reps;
    exp.threads = cfg.threads;
    const ExperimentReport report = weight_deviation_experiment(exp);
    const Json j = to_json(report);
    const bool json_out = ends_with(cfg.output_path, ".json");
    emit(cfg, json_out ? j.dump(2) + "\n" : experiment_csv(report), j, out);
    return 0;
}

inline int run_master_eq(const RunConfig& cfg, std::ostream& out) {
    require(cfg.p >= 1, ErrorCode::invalid_argument, "master-eq requires --p");
    require(cfg.n > 0 || cfg.gamma > 0.0, ErrorCode::invalid_argument, "master-eq requires --n or --gamma > 0");
    MasterConfig mc;
    mc.p = cfg.p;
    mc.n = cfg.n > 0 ? cfg.n : static_cast<std::size_t>(std::llround(static_cast<double>(cfg.p) / cfg.gamma));
    mc.spec = distribution(cfg, cfg.p);
    mc.shape = mc.spec.shape;
    mc.alpha = cfg.alpha;
    const EstimatorKind kind = parse_kind(cfg.kind);
    require(is_regularized(kind), ErrorCode::invalid_argument, "master-eq supports --kind tre or mre");
    mc.model = kind == EstimatorKind::TRE ? WeightModel::tre() : WeightModel::of(parse_u_function(cfg.u_name));
    mc.reps = cfg.reps;
    mc.seed = require_seed(cfg);
    mc.tol_root = cfg.tol_root;
    mc.threads = cfg.threads;
    const MasterEquationResult r = solve_master(mc);
    Json j = to_json(r);
    j["n"] = mc.n;
    j["p"] = mc.p;
    j["gamma"] = static_cast<double>(mc.p) / static_cast<double>(mc.n);
    j["alpha"] = mc.alpha;
    if (kind == EstimatorKind::TRE) {
        const double target = 1.0 / (1.0 + mc.alpha - static_cast<double>(mc.p) / static_cast<double>(mc.n));
        j["sanity"] = {{"q_target", target},
                       {"q_at_root", r.q_at_root},
                       {"within_3_stderr", std::abs(r.q_at_root - target) <= 3.0 * r.mc_stderr +
                                               cfg.tol_root}};
    }
    emit(cfg, j.dump(2) + "\n", j, out);
    return 0;
}

inline int run_sparse_cov(const RunConfig& cfg, std::ostream& out) {
    require(!cfg.input_path.empty(), ErrorCode::invalid_argument, "sparse-cov requires --input");
    const Dataset data = read_dataset_csv(std::filesystem::path(cfg.input_path));
    std::optional<ScatterMatrix> truth;
    if (!cfg.truth_path.empty()) truth = ScatterMatrix(read_matrix_csv(std::filesystem::path(cfg.truth_path)));
    const SparseEstimate est = sparse_cov_estimate(data, cfg.c1, truth, solver(cfg));
    const Json side = sidecar_json(est);
    const bool json_out = ends_with(cfg.output_path, ".json");
    Json full = side;
    full["matrix"] = matrix_to_json(est.matrix);
    full["p"] = data.p();
    emit(cfg, json_out ? full.dump(2) + "\n" : matrix_csv(est.matrix), side, out);
    return 0;
}

inline int run_clime(const RunConfig& cfg, std::ostream& out) {
    require(!cfg.input_path.empty(), ErrorCode::invalid_argument, "clime requires --input");
    const Dataset data = read_dataset_csv(std::filesystem::path(cfg.input_path));
    const ScatterEstimate te = tyler(data, solver(cfg));
    require(te.converged, ErrorCode::non_convergence, "Tyler proxy did not converge");
    std::optional<Matrix> truth;
    if (!cfg.truth_path.empty()) truth = read_matrix_csv(std::filesystem::path(cfg.truth_path));
    const SparseEstimate est = clime(te.matrix, cfg.lambda, truth, resolve_threads(cfg.threads));
    const Json side = sidecar_json(est);
    const bool json_out = ends_with(cfg.output_path, ".json");
    Json full = side;
    full["matrix"] = matrix_to_json(est.matrix);
    full["p"] = data.p();
    emit(cfg, json_out ? full.dump(2) + "\n" : matrix_csv(est.matrix), side, out);
    return 0;
}

inline int run_diagnose(const RunConfig& cfg, std::ostream& out) {
    std::optional<Dataset> data;
    if (!cfg.input_path.empty()) {
        data = read_dataset_csv(std::filesystem::path(cfg.input_path));
    } else {
        require(cfg.p >= 1 && cfg.n >= 1, ErrorCode::invalid_argument, "diagnose needs --input or --p and --n");
        data = sample(distribution(cfg, cfg.p), cfg.n, cfg.p, require_seed(cfg));
    }
    Json j{{"n", data->n()}, {"p", data->p()}, {"gamma", data->gamma()}};
    const EigenBounds eb = eigen_bounds_diag(*data);
    j["eigen_bounds"] = {{"lambda_min", eb.lambda_min}, {"lambda_max", eb.lambda_max}};
    if (data->n() > data->p()) j["quadratic_forms"] = to_json(quadratic_form_diagnostics(*data));
    j["stieltjes"] = {{"eps", cfg.eps}, {"value", stieltjes_diag(*data, cfg.eps)}};
    emit(cfg, j.dump(2) + "\n", j, out);
    return 0;
}

}  // namespace detail

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::estimate: return detail::run_estimate(cfg, out);
            case Command::simulate: return detail::run_simulate(cfg, out);
            case Command::master_eq: return detail::run_master_eq(cfg, out);
            case Command::sparse_cov: return detail::run_sparse_cov(cfg, out);
            case Command::clime: return detail::run_clime(cfg, out);
            case Command::diagnose: return detail::run_diagnose(cfg, out);
        }
    } catch (const Error& e) {
        if (is_numerical(e.code())) return detail::numerical_failure(cfg, e, err);
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

/// Parses argv into a RunConfig and runs it.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    CLI::App app{"Robust scatter estimation toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    RunConfig cfg;
    std::uint64_t seed = 0;

    const auto add_common = [&](CLI::App* sub, bool out_required) {
        auto* o = sub->add_option("--out", cfg.output_path, "Output path (.json or .csv)");
        if (out_required) o->required();
        sub->add_option("--threads", cfg.threads, "Worker threads (0: ROBUST_SCATTER_THREADS or 1)");
        sub->add_option("--tol", cfg.tol, "Fixed-point tolerance");
        sub->add_option("--max-iter", cfg.max_iter, "Fixed-point iteration cap");
    };
    const auto add_estimator = [&](CLI::App* sub) {
        sub->add_option("--kind", cfg.kind, "Estimator: tyler, maronna, tre, mre");
        sub->add_option("--u", cfg.u_name, "Weight function: rational or huber:t");
        sub->add_option("--alpha", cfg.alpha, "Regularization parameter (tre, mre)");
    };
    const auto add_distribution = [&](CLI::App* sub) {
        sub->add_option("--dist,--family", cfg.family, "gaussian, laplace, permuted-smoothed, elliptical");
        sub->add_option("--sigma", cfg.sigma, "Smoothing level for permuted-smoothed");
        sub->add_option("--radial", cfg.radial, "Elliptical radial law: constant:c, chi:k, pareto:a");
        sub->add_option("--mean", cfg.mean, "Mean vector (comma list, or one value for every coordinate)");
        sub->add_option("--shape-file", cfg.shape_file, "CSV file holding the shape matrix");
        sub->add_option("--config", cfg.config_path, "File with family/sigma/radial/mean/shape-file keys");
        sub->add_option("--seed", seed, "Random seed");
    };

    auto* est = app.add_subcommand("estimate", "Fit an M-estimator of scatter to a CSV dataset");
    add_common(est, true);
    add_estimator(est);
    est->add_option("--input", cfg.input_path, "Dataset CSV")->required();

    auto* sim = app.add_subcommand("simulate", "Weight-deviation experiment across dimensions");
    add_common(sim, true);
    add_estimator(sim);
    add_distribution(sim);
    sim->add_option("--dims", cfg.dims, "Comma-separated dimensions")->delimiter(',');
    sim->add_option("--ratio", cfg.ratio, "n / p");
    sim->add_option("--reps", cfg.reps, "Replicates per dimension");
    sim->add_option("--master-reps", cfg.master_reps, "Monte-Carlo reps for TRE/MRE predictions");

    auto* me = app.add_subcommand("master-eq", "Solve the master equation F(d*) = 1");
    add_common(me, false);
    add_estimator(me);
    add_distribution(me);
    me->add_option("--p", cfg.p, "Dimension")->required();
    me->add_option("--n", cfg.n, "Sample count (overrides --gamma)");
    me->add_option("--gamma", cfg.gamma, "p / n");
    me->add_option("--reps", cfg.reps, "Monte-Carlo replicates");
    me->add_option("--tol-root", cfg.tol_root, "Root tolerance");

    auto* sc = app.add_subcommand("sparse-cov", "Hard-thresholded Tyler estimator");
    add_common(sc, true);
    sc->add_option("--input", cfg.input_path, "Dataset CSV")->required();
    sc->add_option("--c1", cfg.c1, "Threshold constant");
    sc->add_option("--truth", cfg.truth_path, "CSV of the true shape matrix");

    auto* cl = app.add_subcommand("clime", "CLIME precision estimate with Tyler proxy");
    add_common(cl, true);
    cl->add_option("--input", cfg.input_path, "Dataset CSV")->required();
    cl->add_option("--lambda", cfg.lambda, "Constraint level");
    cl->add_option("--truth", cfg.truth_path, "CSV of the true precision matrix");

    auto* dg = app.add_subcommand("diagnose", "Quadratic-form, Stieltjes and eigenvalue diagnostics");
    add_common(dg, false);
    add_distribution(dg);
    dg->add_option("--input", cfg.input_path, "Dataset CSV (otherwise synthetic)");
    dg->add_option("--p", cfg.p, "Dimension (synthetic)");
    dg->add_option("--n", cfg.n, "Samples (synthetic)");
    dg->add_option("--eps", cfg.eps, "Stieltjes regularization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        const int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? 0 : 1;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "estimate") cfg.command = Command::estimate;
    else if (name == "simulate") cfg.command = Command::simulate;
    else if (name == "master-eq") cfg.command = Command::master_eq;
    else if (name == "sparse-cov") cfg.command = Command::sparse_cov;
    else if (name == "clime") cfg.command = Command::clime;
    else cfg.command = Command::diagnose;
    if (const auto* opt = chosen->get_option_no_throw("--seed"); opt && opt->count()) cfg.seed = seed;
    if (!cfg.config_path.empty()) {
        try {
            detail::apply_config_file(cfg, cfg.config_path, *chosen);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return run(cfg, out, err);
}

}  // namespace robust_scatter::cli
