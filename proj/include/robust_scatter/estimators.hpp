#pragma once

// Fixed-point solvers for Tyler's and Maronna's M-estimators of scatter and
// their regularized variants (shrinkage toward alpha/(1+alpha) I).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "robust_scatter/error.hpp"
#include "robust_scatter/scatter_model.hpp"
#include "robust_scatter/u_function.hpp"

namespace robust_scatter {

enum class EstimatorKind { TE, ME, TRE, MRE };

inline std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::TE: return "TE";
        case EstimatorKind::ME: return "ME";
        case EstimatorKind::TRE: return "TRE";
        case EstimatorKind::MRE: return "MRE";
    }
    return "unknown";
}

inline EstimatorKind parse_kind(std::string_view name) {
    std::string s(name);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "te" || s == "tyler") return EstimatorKind::TE;
    if (s == "me" || s == "maronna") return EstimatorKind::ME;
    if (s == "tre" || s == "tyler-regularized") return EstimatorKind::TRE;
    if (s == "mre" || s == "maronna-regularized") return EstimatorKind::MRE;
    throw Error(ErrorCode::invalid_argument, "unknown estimator kind '" + std::string(name) + "'");
}

inline bool is_tyler_type(EstimatorKind kind) { return kind == EstimatorKind::TE || kind == EstimatorKind::TRE; }
inline bool is_regularized(EstimatorKind kind) { return kind == EstimatorKind::TRE || kind == EstimatorKind::MRE; }

struct SolverConfig {
    double tol = 1e-10;
    std::size_t max_iter = 500;
    std::optional<ScatterMatrix> init;  // identity when empty

    void validate(std::size_t p) const {
        require(tol > 0.0, ErrorCode::invalid_argument, "solver tolerance must be positive");
        require(max_iter >= 1, ErrorCode::invalid_argument, "max_iter must be at least 1");
        if (init) {
            require(init->p() == p, ErrorCode::dimension_mismatch, "initial matrix has wrong dimension");
            require(init->is_spd(), ErrorCode::not_spd, "initial matrix is not positive definite");
        }
    }
};

struct ScatterEstimate {
    ScatterMatrix matrix;
    Vector weights;
    EstimatorKind kind = EstimatorKind::TE;
    double alpha = 0.0;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::optional<UFunction> u;  // ME / MRE only
};

/// d_i = p^{-1} x_i^T M^{-1} x_i for every row, reusing one factorization of M.
inline Vector quadratic_forms(const Matrix& x, const Eigen::LLT<Matrix>& factor) {
    const Matrix z = factor.matrixL().solve(x.transpose());
    return z.colwise().squaredNorm().transpose() / static_cast<double>(x.cols());
}

inline Vector quadratic_forms(const Matrix& x, const Matrix& m) {
    return quadratic_forms(x, spd_factor(m, "scatter iterate"));
}

/// (1/n) sum_i w_i x_i x_i^T.
inline Matrix weighted_covariance(const Matrix& x, const Vector& w) {
    const Matrix scaled = x.array().colwise() * w.array().sqrt();
    Matrix s = Matrix::Zero(x.cols(), x.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), 1.0 / static_cast<double>(x.rows()));
    return s.selfadjointView<Eigen::Lower>();
}

namespace detail {

inline double weight_from_form(EstimatorKind kind, const std::optional<UFunction>& u, double d) {
    return is_tyler_type(kind) ? 1.0 / d : (*u)(d);
}

inline Vector weights_from_forms(EstimatorKind kind, const std::optional<UFunction>& u, const Vector& d) {
    Vector w(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) w(i) = weight_from_form(kind, u, d(i));
    return w;
}

/// Right-hand side of the defining equation evaluated at weights w.
inline Matrix rhs_from_weights(EstimatorKind kind, const Matrix& x, const Vector& w, double alpha) {
    Matrix m = weighted_covariance(x, w);
    switch (kind) {
        case EstimatorKind::TE:
            m *= static_cast<double>(x.cols()) / m.trace();
            break;
        case EstimatorKind::ME:
            break;
        case EstimatorKind::TRE:
        case EstimatorKind::MRE:
            m = (m + alpha * Matrix::Identity(x.cols(), x.cols())) / (1.0 + alpha);
            break;
    }
    return symmetrized(m);
}

inline void reject_degenerate_rows(const Matrix& x) {
    const Vector norms = x.rowwise().norm();
    const double max_norm = norms.maxCoeff();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
        require(norms(i) >= 1e-14 * max_norm && norms(i) > 0.0, ErrorCode::invalid_argument,
                "sample " + std::to_string(i) + " is (numerically) the zero vector; its Tyler weight is undefined");
}

/// Picard iteration Sigma_{k+1} = RHS(Sigma_k), stopped when the relative
/// Frobenius change ||Sigma_{k+1} - Sigma_k||_F / ||Sigma_k||_F drops to tol.
/// That change is exactly the fixed-point residual of Sigma_k, which is kept.
inline ScatterEstimate picard(EstimatorKind kind, const Dataset& data, const std::optional<UFunction>& u,
                              double alpha, const SolverConfig& cfg) {
    const Matrix& x = data.samples();
    const auto p = static_cast<Eigen::Index>(data.p());
    Matrix sigma = cfg.init ? cfg.init->entries() : Matrix::Identity(p, p);
    if (kind == EstimatorKind::TE) sigma *= static_cast<double>(p) / sigma.trace();

    Vector weights;
    double residual = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    for (;;) {
        weights = weights_from_forms(kind, u, quadratic_forms(x, sigma));
        Matrix next = rhs_from_weights(kind, x, weights, alpha);
        residual = (next - sigma).norm() / sigma.norm();
        if (!std::isfinite(residual))
            throw Error(ErrorCode::non_convergence, "fixed-point iteration produced non-finite values");
        if (residual <= cfg.tol) {
            converged = true;
            break;
        }
        if (iterations == cfg.max_iter) break;
        sigma = std::move(next);
        ++iterations;
    }
    return ScatterEstimate{ScatterMatrix(sigma), std::move(weights), kind, alpha, iterations, residual, converged, u};
}

}  // namespace detail

/// Rank proxy for the Kent-Tyler existence condition: n > p and full column rank.
/// The subspace-counting condition itself is not checked.
inline bool check_te_existence(const Dataset& data) {
    if (data.n() <= data.p()) return false;
    Eigen::ColPivHouseholderQR<Matrix> qr(data.samples());
    return static_cast<std::size_t>(qr.rank()) == data.p();
}

/// Tyler's M-estimator, trace normalized to p. Weights are (p^{-1} x_i^T Sigma^{-1} x_i)^{-1}.
inline ScatterEstimate tyler(const Dataset& data, const SolverConfig& cfg = {}) {
    cfg.validate(data.p());
    require(data.n() > data.p(), ErrorCode::invalid_argument, "Tyler's estimator needs n > p");
    detail::reject_degenerate_rows(data.samples());
    require(check_te_existence(data), ErrorCode::singular,
            "samples are rank deficient; Tyler's estimator does not exist");
    return detail::picard(EstimatorKind::TE, data, std::nullopt, 0.0, cfg);
}

/// Maronna's M-estimator with weights u(p^{-1} x_i^T Sigma^{-1} x_i).
inline ScatterEstimate maronna(const Dataset& data, const UFunction& u, const SolverConfig& cfg = {}) {
    cfg.validate(data.p());
    require(data.n() > data.p(), ErrorCode::invalid_argument, "Maronna's estimator needs n > p");
    require(u.admits_maronna(), ErrorCode::invalid_argument,
            "u-function '" + u.name() + "' has phi_inf <= 1; Maronna's estimator need not exist");
    return detail::picard(EstimatorKind::ME, data, u, 0.0, cfg);
}

/// Regularized Tyler estimator; exists for alpha > max(0, p/n - 1).
inline ScatterEstimate tyler_regularized(const Dataset& data, double alpha, const SolverConfig& cfg = {}) {
    cfg.validate(data.p());
    require(alpha > std::max(0.0, data.gamma() - 1.0), ErrorCode::invalid_argument,
            "TRE requires alpha > max(0, p/n - 1)");
    detail::reject_degenerate_rows(data.samples());
    return detail::picard(EstimatorKind::TRE, data, std::nullopt, alpha, cfg);
}

/// Regularized Maronna estimator; unique solution for every alpha > 0.
inline ScatterEstimate maronna_regularized(const Dataset& data, const UFunction& u, double alpha,
                                           const SolverConfig& cfg = {}) {
    cfg.validate(data.p());
    require(alpha > 0.0, ErrorCode::invalid_argument, "MRE requires alpha > 0");
    return detail::picard(EstimatorKind::MRE, data, u, alpha, cfg);
}

/// Dispatch on kind; u is required for ME/MRE and alpha for TRE/MRE.
inline ScatterEstimate estimate(EstimatorKind kind, const Dataset& data, const std::optional<UFunction>& u,
                                double alpha, const SolverConfig& cfg = {}) {
    switch (kind) {
        case EstimatorKind::TE: return tyler(data, cfg);
        case EstimatorKind::TRE: return tyler_regularized(data, alpha, cfg);
        case EstimatorKind::ME:
            require(u.has_value(), ErrorCode::invalid_argument, "ME needs a u-function");
            return maronna(data, *u, cfg);
        case EstimatorKind::MRE:
            require(u.has_value(), ErrorCode::invalid_argument, "MRE needs a u-function");
            return maronna_regularized(data, *u, alpha, cfg);
    }
    throw Error(ErrorCode::invalid_argument, "unknown estimator kind");
}

/// h_j(d) = p^{-1} x_j^T ((1/n) sum_i u(d_i) x_i x_i^T)^{-1} x_j.
inline Vector interference_h(const Vector& d, const Dataset& data, const UFunction& u) {
    require(static_cast<std::size_t>(d.size()) == data.n(), ErrorCode::dimension_mismatch,
            "interference_h: d must have one entry per sample");
    require((d.array() > 0.0).all(), ErrorCode::invalid_argument, "interference_h: d must be positive");
    Vector w(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) w(i) = u(d(i));
    Eigen::LLT<Matrix> llt(weighted_covariance(data.samples(), w));
    require(llt.info() == Eigen::Success, ErrorCode::singular, "interference_h: weighted covariance is singular");
    return quadratic_forms(data.samples(), llt);
}

/// -sum log w_i + (n/p) log det(sum_i w_i x_i x_i^T), for w > 0 with sum w = n.
inline double tyler_objective(const Vector& w, const Dataset& data) {
    const double n = static_cast<double>(data.n());
    require(static_cast<std::size_t>(w.size()) == data.n(), ErrorCode::dimension_mismatch,
            "tyler_objective: one weight per sample required");
    require((w.array() > 0.0).all(), ErrorCode::invalid_argument, "tyler_objective: weights must be positive");
    require(std::abs(w.sum() - n) <= 1e-8 * std::max(1.0, n), ErrorCode::invalid_argument,
            "tyler_objective: weights must sum to n");
    const Matrix m = weighted_covariance(data.samples(), w) * n;
    Eigen::LLT<Matrix> llt(m);
    require(llt.info() == Eigen::Success, ErrorCode::singular, "tyler_objective: weighted scatter is singular");
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -w.array().log().sum() + n / static_cast<double>(data.p()) * log_det;
}

/// Tyler weights rescaled to sum to n; the minimizer of tyler_objective.
inline Vector tyler_normalized_weights(const Vector& tyler_weights) {
    return tyler_weights * (static_cast<double>(tyler_weights.size()) / tyler_weights.sum());
}

/// Weights recomputed from the stored matrix through the defining formula.
inline Vector recompute_weights(const ScatterEstimate& est, const Dataset& data) {
    require(est.matrix.p() == data.p(), ErrorCode::dimension_mismatch, "estimate and data dimensions differ");
    if (!is_tyler_type(est.kind))
        require(est.u.has_value(), ErrorCode::invalid_argument, "estimate lacks its u-function");
    const Vector d = quadratic_forms(data.samples(), est.matrix.entries());
    return detail::weights_from_forms(est.kind, est.u, d);
}

/// ||Sigma - RHS(Sigma)||_F / ||Sigma||_F for the defining equation of est.kind.
inline double fixed_point_residual(const ScatterEstimate& est, const Dataset& data) {
    const Vector w = recompute_weights(est, data);
    const Matrix rhs = detail::rhs_from_weights(est.kind, data.samples(), w, est.alpha);
    return (est.matrix.entries() - rhs).norm() / est.matrix.entries().norm();
}

}  // namespace robust_scatter
