#pragma once

// JSON and CSV encodings of estimates and reports, plus write-then-rename file
// output. Requires nlohmann/json (vendor/json.hpp).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robust_scatter/concentration_lab.hpp"
#include "robust_scatter/dataset_io.hpp"
#include "robust_scatter/error.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/master_equation.hpp"
#include "robust_scatter/sparse_estimation.hpp"

namespace robust_scatter {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
    return flat;
}

inline Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const Json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Json norms_to_json(const NormReport& r) {
    return {{"max_norm", r.max_norm}, {"l1_norm", r.l1_norm}, {"operator_norm", r.operator_norm}};
}

/// est.json schema: {kind, p, n, alpha, matrix (row-major), weights, iterations, residual, converged}.
inline Json to_json(const ScatterEstimate& est) {
    Json j;
    j["kind"] = std::string(to_string(est.kind));
    j["p"] = est.matrix.p();
    j["n"] = static_cast<std::size_t>(est.weights.size());
    j["alpha"] = est.alpha;
    j["matrix"] = matrix_to_json(est.matrix.entries());
    j["weights"] = vector_to_json(est.weights);
    j["iterations"] = est.iterations;
    j["residual"] = est.residual;
    j["converged"] = est.converged;
    if (est.u) j["u"] = est.u->name();
    return j;
}

inline ScatterEstimate scatter_estimate_from_json(const Json& j) {
    try {
        const auto p = j.at("p").get<std::size_t>();
        const auto flat = j.at("matrix").get<std::vector<double>>();
        require(flat.size() == p * p, ErrorCode::parse_error, "matrix has wrong number of entries");
        Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = 0; c < p; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * p + c];
        ScatterEstimate est{ScatterMatrix(m), vector_from_json(j.at("weights")),
                            parse_kind(j.at("kind").get<std::string>()), j.at("alpha").get<double>(),
                            j.at("iterations").get<std::size_t>(), j.at("residual").get<double>(),
                            j.at("converged").get<bool>(), std::nullopt};
        if (j.contains("u")) est.u = parse_u_function(j.at("u").get<std::string>());
        require(static_cast<std::size_t>(est.weights.size()) == j.at("n").get<std::size_t>(),
                ErrorCode::parse_error, "weights length differs from n");
        return est;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("malformed estimate JSON: ") + e.what());
    }
}

inline Json to_json(const MasterEquationResult& r) {
    return {{"kind", std::string(to_string(r.kind))},
            {"d_star", r.d_star},
            {"bracket", {r.d_lo, r.d_hi}},
            {"f_residual", r.f_residual},
            {"mc_reps", r.mc_reps},
            {"mc_stderr", r.mc_stderr},
            {"q_at_root", r.q_at_root},
            {"f_stderr", r.f_stderr},
            {"predicted_weight", r.predicted_weight},
            {"bisection_steps", r.bisection_steps}};
}

inline Json to_json(const ExperimentReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"p", row.p},
                        {"n", row.n},
                        {"predicted_weight", row.predicted_weight},
                        {"linf_mean", row.linf_mean},
                        {"linf_stderr", row.linf_stderr},
                        {"rmse_mean", row.rmse_mean},
                        {"rmse_stderr", row.rmse_stderr},
                        {"reps", row.reps},
                        {"failures", row.failures},
                        {"seeds", row.seeds}});
    }
    return {{"rows", rows},
            {"slope_linf", r.slope_linf},
            {"slope_rmse", r.slope_rmse},
            {"fit_linf", {{"slope", r.fit_linf.slope}, {"intercept", r.fit_linf.intercept}, {"r2", r.fit_linf.r2}}},
            {"fit_rmse", {{"slope", r.fit_rmse.slope}, {"intercept", r.fit_rmse.intercept}, {"r2", r.fit_rmse.r2}}},
            {"predicted_weight", r.predicted_weight},
            {"base_seed", r.base_seed},
            {"seed_rule", "replicate seed = derive_seed(derive_seed(base_seed, dim_index), rep_index)"},
            {"wall_seconds", r.wall_seconds}};
}

/// Per-dimension table: p,n,linf_mean,linf_stderr,rmse_mean,rmse_stderr.
inline std::string experiment_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "p,n,linf_mean,linf_stderr,rmse_mean,rmse_stderr\n";
    for (const auto& row : r.rows)
        out << row.p << ',' << row.n << ',' << row.linf_mean << ',' << row.linf_stderr << ',' << row.rmse_mean
            << ',' << row.rmse_stderr << '\n';
    return out.str();
}

inline Json sidecar_json(const SparseEstimate& e) {
    Json j{{"method", std::string(to_string(e.method))},
           {e.method == SparseMethod::threshold ? "t" : "lambda", e.parameter},
           {"norms", norms_to_json(e.input_norms)},
           {"error_vs_truth", nullptr}};
    if (e.error_vs_truth) j["error_vs_truth"] = norms_to_json(*e.error_vs_truth);
    return j;
}

inline Json to_json(const QuadraticFormReport& r) {
    return {{"gamma", r.gamma},
            {"max_full_deviation", r.max_full_deviation},
            {"max_leave_one_out_deviation", r.max_leave_one_out_deviation},
            {"leave_one_out_limit", 1.0 / (1.0 - r.gamma)},
            {"max_sherman_morrison_error", r.max_sherman_morrison_error}};
}

inline std::string matrix_csv(const Matrix& m) {
    std::ostringstream out;
    write_matrix_csv(out, m, 10);
    return out.str();
}

/// Writes to a sibling temporary file, then renames over the destination.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::io_error, "cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        require(static_cast<bool>(out), ErrorCode::io_error, "failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::io_error, "cannot rename into " + path.string() + ": " + ec.message());
    }
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
}

}  // namespace robust_scatter
