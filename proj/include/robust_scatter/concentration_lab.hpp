#pragma once

// Weight-concentration experiment (deviation of estimator weights from their
// predicted limit across dimensions) and spectral diagnostics of the sample
// covariance.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/master_equation.hpp"
#include "robust_scatter/parallel.hpp"
#include "robust_scatter/random.hpp"
#include "robust_scatter/samplers.hpp"
#include "robust_scatter/scatter_model.hpp"

namespace robust_scatter {

struct LogLogFit {
    double slope = 0.0;  // positive for decaying curves: value ~ p^{-slope}
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares of log(value) on log(p); reports the negated slope.
inline LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    require(points.size() >= 2, ErrorCode::invalid_argument, "slope fit needs at least two points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [p, v] : points) {
        require(p > 0.0 && v > 0.0, ErrorCode::invalid_argument, "slope fit needs positive coordinates");
        sx += std::log(p);
        sy += std::log(v);
    }
    const double m = static_cast<double>(points.size());
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [p, v] : points) {
        const double dx = std::log(p) - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    require(sxx > 0.0, ErrorCode::invalid_argument, "slope fit needs at least two distinct p values");
    const double beta = sxy / sxx;
    LogLogFit fit;
    fit.slope = -beta;
    fit.intercept = my - beta * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

struct ExperimentConfig {
    EstimatorKind kind = EstimatorKind::TE;
    DistributionSpec dist = DistributionSpec::gaussian();
    std::optional<UFunction> u;  // ME / MRE
    double alpha = 0.0;          // TRE / MRE
    std::vector<std::size_t> dims{64, 128, 256, 512};
    double ratio = 2.0;  // n = ratio * p
    std::size_t reps = 50;
    std::uint64_t base_seed = 0;
    SolverConfig solver;
    std::size_t master_reps = 200;  // for TRE / MRE predictions
    std::size_t threads = 0;        // 0: ROBUST_SCATTER_THREADS or 1

    void validate() const {
        require(!dims.empty(), ErrorCode::invalid_argument, "experiment needs at least one dimension");
        for (std::size_t k = 1; k < dims.size(); ++k)
            require(dims[k] > dims[k - 1], ErrorCode::invalid_argument, "dims must be strictly increasing");
        require(dims.front() >= 1, ErrorCode::invalid_argument, "dims must be positive");
        require(reps >= 1, ErrorCode::invalid_argument, "reps must be at least 1");
        require(ratio > 0.0, ErrorCode::invalid_argument, "ratio must be positive");
        if (kind == EstimatorKind::ME || kind == EstimatorKind::MRE)
            require(u.has_value(), ErrorCode::invalid_argument, "ME/MRE experiments need a u-function");
    }
};

struct ExperimentRow {
    std::size_t p = 0;
    std::size_t n = 0;
    double predicted_weight = 0.0;
    double linf_mean = 0.0;
    double linf_stderr = 0.0;
    double rmse_mean = 0.0;
    double rmse_stderr = 0.0;
    std::size_t reps = 0;      // successful replicates aggregated
    std::size_t failures = 0;  // non-converged replicates excluded
    std::vector<std::uint64_t> seeds;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    LogLogFit fit_linf;
    LogLogFit fit_rmse;
    double slope_linf = 0.0;
    double slope_rmse = 0.0;
    double predicted_weight = 0.0;  // at the largest dimension
    std::uint64_t base_seed = 0;
    double wall_seconds = 0.0;
};

/// Deviation statistics of one weight vector against w*.
struct WeightDeviation {
    double linf = 0.0;
    double rmse = 0.0;
};

inline WeightDeviation weight_deviation(const Vector& w, double target) {
    const Vector diff = w.array() - target;
    return {diff.cwiseAbs().maxCoeff(), std::sqrt(diff.squaredNorm() / static_cast<double>(w.size()))};
}

/// Replicate seed for (dimension index, replicate index).
inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t dim_index, std::size_t rep) {
    return derive_seed(base_seed, dim_index, rep);
}

/// Limiting weight for kind at dimension p with n samples.
inline double experiment_prediction(const ExperimentConfig& cfg, std::size_t n, std::size_t p,
                                    std::uint64_t seed) {
    switch (cfg.kind) {
        case EstimatorKind::TE:
            return predicted_weight(cfg.kind, std::nullopt, std::nullopt, cfg.dist.tau(p));
        case EstimatorKind::ME:
            return predicted_weight(cfg.kind, cfg.u, std::nullopt, std::nullopt);
        case EstimatorKind::TRE:
        case EstimatorKind::MRE: {
            MasterConfig mc;
            mc.spec = cfg.dist;
            mc.shape = cfg.dist.shape;
            mc.n = n;
            mc.p = p;
            mc.alpha = cfg.alpha;
            mc.model = cfg.kind == EstimatorKind::TRE ? WeightModel::tre() : WeightModel::of(*cfg.u);
            mc.reps = cfg.master_reps;
            mc.seed = seed;
            mc.tol_root = 1e-8;
            mc.threads = cfg.threads;
            return solve_master(mc).predicted_weight;
        }
    }
    throw Error(ErrorCode::invalid_argument, "unknown estimator kind");
}

inline ExperimentReport weight_deviation_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::size_t threads = resolve_threads(cfg.threads);
    ExperimentReport report;
    report.base_seed = cfg.base_seed;

    for (std::size_t k = 0; k < cfg.dims.size(); ++k) {
        const std::size_t p = cfg.dims[k];
        const auto n = static_cast<std::size_t>(std::llround(cfg.ratio * static_cast<double>(p)));
        require(n >= 1, ErrorCode::invalid_argument, "ratio * p rounds to zero samples");
        ExperimentRow row;
        row.p = p;
        row.n = n;
        row.predicted_weight = experiment_prediction(cfg, n, p, derive_seed(cfg.base_seed, 0xA5A5u, k));

        std::vector<std::optional<WeightDeviation>> outcomes(cfg.reps);
        row.seeds.resize(cfg.reps);
        for (std::size_t r = 0; r < cfg.reps; ++r) row.seeds[r] = replicate_seed(cfg.base_seed, k, r);
        parallel_for(cfg.reps, threads, [&](std::size_t r) {
            const Dataset data = sample(cfg.dist, n, p, row.seeds[r]);
            try {
                const ScatterEstimate est = estimate(cfg.kind, data, cfg.u, cfg.alpha, cfg.solver);
                if (est.converged) outcomes[r] = weight_deviation(est.weights, row.predicted_weight);
            } catch (const Error& e) {
                if (!is_numerical(e.code())) throw;
            }
        });

        std::vector<double> linf, rmse;
        for (const auto& o : outcomes) {
            if (!o) {
                ++row.failures;
                continue;
            }
            linf.push_back(o->linf);
            rmse.push_back(o->rmse);
        }
        if (static_cast<double>(row.failures) > 0.1 * static_cast<double>(cfg.reps))
            throw Error(ErrorCode::non_convergence,
                        "p=" + std::to_string(p) + ": " + std::to_string(row.failures) + " of " +
                            std::to_string(cfg.reps) + " replicates failed to converge");
        const auto l = mean_stderr(linf);
        const auto s = mean_stderr(rmse);
        row.reps = linf.size();
        row.linf_mean = l.mean;
        row.linf_stderr = l.stderr_;
        row.rmse_mean = s.mean;
        row.rmse_stderr = s.stderr_;
        report.rows.push_back(std::move(row));
    }

    report.predicted_weight = report.rows.back().predicted_weight;
    if (report.rows.size() >= 2) {
        std::vector<std::pair<double, double>> lpts, rpts;
        for (const auto& row : report.rows) {
            lpts.emplace_back(static_cast<double>(row.p), row.linf_mean);
            rpts.emplace_back(static_cast<double>(row.p), row.rmse_mean);
        }
        report.fit_linf = fit_loglog_slope(lpts);
        report.fit_rmse = fit_loglog_slope(rpts);
        report.slope_linf = report.fit_linf.slope;
        report.slope_rmse = report.fit_rmse.slope;
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

struct QuadraticFormReport {
    double gamma = 0.0;
    double max_full_deviation = 0.0;          // max_i |p^{-1} x_i^T S^{-1} x_i - 1|
    double max_leave_one_out_deviation = 0.0; // max_i |p^{-1} x_i^T S_{-i}^{-1} x_i - 1/(1-gamma)|
    double max_sherman_morrison_error = 0.0;  // max_i relative |full - q/(1+gamma q)|
    Vector full_forms;
    Vector leave_one_out_forms;
};

/// Full and leave-one-out quadratic forms. S_{-i} is factored independently by
/// a rank-one Cholesky downdate, so the Sherman-Morrison link is a real check.
inline QuadraticFormReport quadratic_form_diagnostics(const Dataset& data) {
    require(data.n() > data.p(), ErrorCode::invalid_argument, "quadratic-form diagnostics need n > p");
    const Matrix& x = data.samples();
    const double inv_n = 1.0 / static_cast<double>(data.n());
    const double p = static_cast<double>(data.p());
    QuadraticFormReport report;
    report.gamma = data.gamma();
    Eigen::LLT<Matrix> full(sample_covariance(data).entries());
    require(full.info() == Eigen::Success, ErrorCode::singular, "sample covariance is singular");
    report.full_forms = quadratic_forms(x, full);
    report.leave_one_out_forms.resize(x.rows());
    const double loo_limit = 1.0 / (1.0 - report.gamma);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::LLT<Matrix> loo = full;
        const Vector xi = x.row(i).transpose();
        loo.rankUpdate(xi, -inv_n);
        require(loo.info() == Eigen::Success, ErrorCode::singular, "leave-one-out covariance is singular");
        const double q = xi.dot(loo.solve(xi)) / p;
        report.leave_one_out_forms(i) = q;
        const double full_form = report.full_forms(i);
        const double linked = q / (1.0 + report.gamma * q);
        report.max_sherman_morrison_error =
            std::max(report.max_sherman_morrison_error, std::abs(full_form - linked) / std::abs(full_form));
        report.max_full_deviation = std::max(report.max_full_deviation, std::abs(full_form - 1.0));
        report.max_leave_one_out_deviation = std::max(report.max_leave_one_out_deviation, std::abs(q - loo_limit));
    }
    return report;
}

/// m_hat(eps) = p^{-1} Tr (S + eps I)^{-1} on the sample covariance of data.
inline double stieltjes_diag(const Dataset& data, double eps) {
    require(eps >= 0.0, ErrorCode::invalid_argument, "stieltjes_diag needs eps >= 0");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sample_covariance(data).entries(), Eigen::EigenvaluesOnly);
    const Vector shifted = eig.eigenvalues().array() + eps;
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    require(shifted.minCoeff() > 1e-12 * scale, ErrorCode::singular, "S + eps I is singular");
    return shifted.cwiseInverse().sum() / static_cast<double>(data.p());
}

struct EigenBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

inline EigenBounds eigen_bounds_diag(const Dataset& data) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sample_covariance(data).entries(), Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

}  // namespace robust_scatter
