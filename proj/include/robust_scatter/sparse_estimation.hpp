#pragma once

// Sparse shape estimation by hard-thresholding Tyler's estimator, and sparse
// inverse-shape estimation by CLIME with Tyler's estimator as covariance proxy.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/parallel.hpp"
#include "robust_scatter/scatter_model.hpp"
#include "robust_scatter/simplex.hpp"

namespace robust_scatter {

enum class SparseMethod { threshold, clime };

inline std::string_view to_string(SparseMethod m) { return m == SparseMethod::threshold ? "threshold" : "clime"; }

struct SparseEstimate {
    Matrix matrix;
    SparseMethod method = SparseMethod::threshold;
    double parameter = 0.0;  // threshold t or CLIME lambda
    NormReport input_norms;
    std::optional<NormReport> error_vs_truth;
};

/// T_t(M)_ij = M_ij 1{|M_ij| >= t}; entries exactly at t are kept.
inline Matrix hard_threshold(const Matrix& m, double t) {
    require(t >= 0.0, ErrorCode::invalid_argument, "threshold must be non-negative");
    return (m.array().abs() >= t).select(m, 0.0);
}

/// t = c1 * scale * sqrt(log p / n).
inline double choose_threshold(std::size_t n, double p, double scale, double c1) {
    require(n >= 1 && p > 1.0 && scale > 0.0, ErrorCode::invalid_argument,
            "choose_threshold needs n >= 1, p > 1, scale > 0");
    return c1 * scale * std::sqrt(std::log(p) / static_cast<double>(n));
}

/// Thresholded Tyler estimator. scale is the operator norm of the estimate.
inline SparseEstimate sparse_cov_estimate(const Dataset& data, double c1,
                                          const std::optional<ScatterMatrix>& truth = std::nullopt,
                                          const SolverConfig& cfg = {}) {
    require(c1 >= 0.0, ErrorCode::invalid_argument, "c1 must be non-negative");
    const ScatterEstimate te = tyler(data, cfg);
    require(te.converged, ErrorCode::non_convergence, "Tyler's estimator did not converge");
    const Matrix& sigma = te.matrix.entries();
    SparseEstimate out;
    out.method = SparseMethod::threshold;
    out.input_norms = matrix_norms(sigma);
    out.parameter = choose_threshold(data.n(), static_cast<double>(data.p()), out.input_norms.operator_norm, c1);
    out.matrix = hard_threshold(sigma, out.parameter);
    if (truth) {
        require(truth->p() == data.p(), ErrorCode::dimension_mismatch, "truth has the wrong dimension");
        out.error_vs_truth = matrix_norms(out.matrix - truth->entries());
    }
    return out;
}

/// Solves min ||w||_1 s.t. ||S w - e_j||_inf <= lambda through w = w+ - w-.
inline Vector clime_column(const ScatterMatrix& s_hat, std::size_t j, double lambda) {
    require(lambda > 0.0, ErrorCode::invalid_argument, "CLIME needs lambda > 0");
    require(j < s_hat.p(), ErrorCode::index_out_of_range, "CLIME column index out of range");
    const auto p = static_cast<Eigen::Index>(s_hat.p());
    const Matrix& s = s_hat.entries();
    Matrix a(2 * p, 2 * p);
    a << s, -s, -s, s;
    Vector e = Vector::Zero(p);
    e(static_cast<Eigen::Index>(j)) = 1.0;
    Vector b(2 * p);
    b << Vector::Constant(p, lambda) + e, Vector::Constant(p, lambda) - e;
    const LpResult lp = solve_lp(a, b, Vector::Ones(2 * p));
    if (lp.status == LpStatus::infeasible)
        throw Error(ErrorCode::infeasible, "CLIME column " + std::to_string(j) + " is infeasible at lambda");
    require(lp.status == LpStatus::optimal, ErrorCode::non_convergence,
            "CLIME column " + std::to_string(j) + ": simplex did not reach optimality");
    return lp.x.head(p) - lp.x.tail(p);
}

/// All columns, then symmetrized keeping the smaller-magnitude entry of each pair.
inline SparseEstimate clime(const ScatterMatrix& s_hat, double lambda,
                            const std::optional<Matrix>& truth_precision = std::nullopt,
                            std::size_t threads = 1) {
    const auto p = static_cast<Eigen::Index>(s_hat.p());
    Matrix omega(p, p);
    std::vector<Vector> columns(s_hat.p());
    parallel_for(s_hat.p(), resolve_threads(threads),
                 [&](std::size_t j) { columns[j] = clime_column(s_hat, j, lambda); });
    for (Eigen::Index j = 0; j < p; ++j) omega.col(j) = columns[static_cast<std::size_t>(j)];

    Matrix sym(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            const double v = std::abs(omega(i, j)) <= std::abs(omega(j, i)) ? omega(i, j) : omega(j, i);
            sym(i, j) = v;
            sym(j, i) = v;
        }
    }
    SparseEstimate out;
    out.method = SparseMethod::clime;
    out.parameter = lambda;
    out.input_norms = matrix_norms(s_hat.entries());
    out.matrix = std::move(sym);
    if (truth_precision) {
        require(truth_precision->rows() == p && truth_precision->cols() == p, ErrorCode::dimension_mismatch,
                "truth precision has the wrong dimension");
        out.error_vs_truth = matrix_norms(out.matrix - *truth_precision);
    }
    return out;
}

}  // namespace robust_scatter
