#pragma once

// Deterministic weight prediction for the regularized estimators.
//
//   Q(d) = p^{-1} E Tr Sigma_p (phi(d) S_{-i} + alpha d I)^{-1}
//   F(d) = (1 + alpha) Q(d) / (1 + gamma phi(d) Q(d))
//
// with S_{-i} built from n-1 fresh samples but normalized by 1/n. The root
// d* of F(d*) = 1 fixes the limiting weights: u(d*) for MRE, 1/d* for TRE.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/estimators.hpp"
#include "robust_scatter/parallel.hpp"
#include "robust_scatter/random.hpp"
#include "robust_scatter/samplers.hpp"
#include "robust_scatter/scatter_model.hpp"
#include "robust_scatter/u_function.hpp"

namespace robust_scatter {

/// Either a Maronna weight function u, or the Tyler case u(x) = 1/x (phi == 1).
class WeightModel {
public:
    static WeightModel tre() { return WeightModel(std::nullopt); }
    static WeightModel of(UFunction u) { return WeightModel(std::move(u)); }

    bool is_tre() const { return !u_.has_value(); }
    const std::optional<UFunction>& u() const { return u_; }
    EstimatorKind regularized_kind() const { return is_tre() ? EstimatorKind::TRE : EstimatorKind::MRE; }
    std::string name() const { return is_tre() ? std::string("tyler") : u_->name(); }

    double phi(double d) const { return is_tre() ? 1.0 : u_->phi(d); }
    double weight(double d) const { return is_tre() ? 1.0 / d : u_->u(d); }

private:
    explicit WeightModel(std::optional<UFunction> u) : u_(std::move(u)) {}
    std::optional<UFunction> u_;
};

/// Q_hat_i(d) = p^{-1} x_i^T (phi(d) S_{-i} + alpha d I)^{-1} x_i.
inline double q_hat(double d, const Dataset& data, std::size_t i, const WeightModel& model, double alpha) {
    require(d > 0.0 && alpha > 0.0, ErrorCode::invalid_argument, "q_hat needs d > 0 and alpha > 0");
    const Matrix s = leave_one_out_covariance(data, i).entries();
    const auto p = static_cast<Eigen::Index>(data.p());
    const Matrix m = model.phi(d) * s + alpha * d * Matrix::Identity(p, p);
    Eigen::LLT<Matrix> llt(m);
    require(llt.info() == Eigen::Success, ErrorCode::singular, "q_hat: regularized matrix is singular");
    const Vector x = data.row(i);
    return x.dot(llt.solve(x)) / static_cast<double>(data.p());
}

/// F_hat_i(d) = (1 + alpha) Q_hat_i / (1 + gamma phi(d) Q_hat_i).
inline double f_hat(double d, const Dataset& data, std::size_t i, const WeightModel& model, double alpha) {
    const double q = q_hat(d, data, i, model, alpha);
    return (1.0 + alpha) * q / (1.0 + data.gamma() * model.phi(d) * q);
}

inline double f_from_q(double q, double phi, double gamma, double alpha) {
    return (1.0 + alpha) * q / (1.0 + gamma * phi * q);
}

/// Monte-Carlo replicas of S_{-i} stored in eigen-coordinates so that Q can be
/// re-evaluated at any d in O(reps * p). Reusing one ensemble across d gives
/// common random numbers, which keeps the estimated F monotone.
class LeaveOneOutEnsemble {
public:
    LeaveOneOutEnsemble(const DistributionSpec& spec, const ScatterMatrix& shape, std::size_t n, std::size_t p,
                        std::size_t reps, std::uint64_t seed, std::size_t threads = 1)
        : p_(p), tau_(shape.tau()) {
        require(n >= 2 && p >= 1, ErrorCode::invalid_argument, "ensemble needs n >= 2 and p >= 1");
        require(reps >= 1, ErrorCode::invalid_argument, "ensemble needs reps >= 1");
        require(shape.p() == p, ErrorCode::dimension_mismatch, "shape dimension differs from p");
        DistributionSpec base = spec;
        base.shape.reset();
        base.mean = Vector();
        const Matrix root = spd_sqrt(shape.entries());
        const bool isotropic = shape.entries().isIdentity(0.0);
        eigenvalues_.resize(reps);
        weights_.resize(reps);
        parallel_for(reps, resolve_threads(threads), [&](std::size_t r) {
            const Dataset y = sample(base, n - 1, p, derive_seed(seed, r));
            const Matrix x = isotropic ? y.samples() : Matrix(y.samples() * root);
            Matrix s = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
            s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(n));
            Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(s.selfadjointView<Eigen::Lower>()));
            eigenvalues_[r] = eig.eigenvalues().cwiseMax(0.0);
            const Matrix& v = eig.eigenvectors();
            weights_[r] = isotropic ? Vector::Ones(static_cast<Eigen::Index>(p))
                                    : Vector((v.transpose() * shape.entries() * v).diagonal());
        });
    }

    std::size_t reps() const { return eigenvalues_.size(); }
    double tau() const { return tau_; }

    /// Per-replica values p^{-1} Tr Sigma_p (phi S + alpha d I)^{-1}.
    std::vector<double> q_values(double d, double phi, double alpha) const {
        std::vector<double> out(reps());
        for (std::size_t r = 0; r < reps(); ++r) {
            const Vector denom = (phi * eigenvalues_[r].array() + alpha * d).matrix();
            require((denom.array() > 0.0).all(), ErrorCode::singular, "Q: regularized matrix is singular");
            out[r] = (weights_[r].array() / denom.array()).sum() / static_cast<double>(p_);
        }
        return out;
    }

    MeanStderr q(double d, double phi, double alpha) const {
        const auto values = q_values(d, phi, alpha);
        return mean_stderr(values);
    }

private:
    std::size_t p_;
    double tau_;
    std::vector<Vector> eigenvalues_;
    std::vector<Vector> weights_;
};

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Monte-Carlo estimate of Q(d) from reps fresh (n-1)-sample draws.
inline McEstimate q_mc(double d, const DistributionSpec& spec, const ScatterMatrix& shape, std::size_t n,
                       std::size_t p, double alpha, const WeightModel& model, std::size_t reps,
                       std::uint64_t seed, std::size_t threads = 1) {
    require(d > 0.0, ErrorCode::invalid_argument, "q_mc needs d > 0");
    const LeaveOneOutEnsemble ensemble(spec, shape, n, p, reps, seed, threads);
    const auto q = ensemble.q(d, model.phi(d), alpha);
    return {q.mean, q.stderr_};
}

struct MasterConfig {
    DistributionSpec spec = DistributionSpec::gaussian();
    std::optional<ScatterMatrix> shape;  // identity when empty
    std::size_t n = 0;
    std::size_t p = 0;
    double alpha = 1.0;
    WeightModel model = WeightModel::tre();
    std::size_t reps = 200;
    std::uint64_t seed = 0;
    double tol_root = 1e-3;
    std::size_t threads = 1;
};

struct MasterEquationResult {
    double d_star = 0.0;
    double d_lo = 0.0;
    double d_hi = 0.0;
    double f_residual = 0.0;
    std::size_t mc_reps = 0;
    double mc_stderr = 0.0;   // standard error of Q(d*)
    double q_at_root = 0.0;   // Monte-Carlo mean of Q(d*)
    double f_stderr = 0.0;    // stderr of Q propagated through F
    double predicted_weight = 0.0;
    EstimatorKind kind = EstimatorKind::TRE;
    std::size_t bisection_steps = 0;
};

/// Limiting weight per estimator: ME 1/phi^{-1}(1), TE 1/tau_p, MRE u(d*), TRE 1/d*.
inline double predicted_weight(EstimatorKind kind, const std::optional<UFunction>& u,
                               std::optional<double> d_star, std::optional<double> tau_p) {
    switch (kind) {
        case EstimatorKind::ME:
            require(u.has_value(), ErrorCode::invalid_argument, "ME prediction needs a u-function");
            require(u->d0().has_value(), ErrorCode::invalid_argument, "phi never reaches 1 for this u-function");
            return 1.0 / *u->d0();
        case EstimatorKind::TE:
            require(tau_p.has_value() && *tau_p > 0.0, ErrorCode::invalid_argument, "TE prediction needs tau_p > 0");
            return 1.0 / *tau_p;
        case EstimatorKind::MRE:
            require(u.has_value() && d_star.has_value(), ErrorCode::invalid_argument,
                    "MRE prediction needs a u-function and d*");
            return u->u(*d_star);
        case EstimatorKind::TRE:
            require(d_star.has_value() && *d_star > 0.0, ErrorCode::invalid_argument, "TRE prediction needs d* > 0");
            return 1.0 / *d_star;
    }
    throw Error(ErrorCode::invalid_argument, "unknown estimator kind");
}

/// Solves F(d*) = 1 by bracket expansion from [1/2, 2] and bisection, all on
/// one common-random-number ensemble.
inline MasterEquationResult solve_master(const MasterConfig& cfg) {
    require(cfg.n >= 2 && cfg.p >= 1, ErrorCode::invalid_argument, "solve_master needs n >= 2, p >= 1");
    require(cfg.reps >= 1, ErrorCode::invalid_argument, "solve_master needs reps >= 1");
    require(cfg.tol_root > 0.0, ErrorCode::invalid_argument, "tol_root must be positive");
    const double gamma = static_cast<double>(cfg.p) / static_cast<double>(cfg.n);
    require(cfg.alpha > 0.0, ErrorCode::invalid_argument, "master equation needs alpha > 0");
    if (cfg.model.is_tre())
        require(cfg.alpha > std::max(0.0, gamma - 1.0), ErrorCode::invalid_argument,
                "TRE master equation needs alpha > max(0, gamma - 1)");

    const ScatterMatrix shape = cfg.shape.value_or(ScatterMatrix::identity(cfg.p));
    const LeaveOneOutEnsemble ensemble(cfg.spec, shape, cfg.n, cfg.p, cfg.reps, cfg.seed, cfg.threads);
    const auto f_at = [&](double d) {
        const double phi = cfg.model.phi(d);
        return f_from_q(ensemble.q(d, phi, cfg.alpha).mean, phi, gamma, cfg.alpha);
    };

    constexpr int max_doublings = 60;
    double lo = 0.5;
    double hi = 2.0;
    int doublings = 0;
    while (f_at(lo) <= 1.0) {
        hi = lo;
        lo *= 0.5;
        if (++doublings > max_doublings)
            throw Error(ErrorCode::bracket_not_found, "F(d) never exceeds 1 within 60 halvings");
    }
    while (f_at(hi) >= 1.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > max_doublings)
            throw Error(ErrorCode::bracket_not_found, "F(d) never drops below 1 within 60 doublings");
    }

    MasterEquationResult result;
    result.kind = cfg.model.regularized_kind();
    result.mc_reps = cfg.reps;
    double mid = 0.5 * (lo + hi);
    for (std::size_t step = 0; step < 400; ++step) {
        mid = 0.5 * (lo + hi);
        const double f = f_at(mid);
        result.bisection_steps = step + 1;
        if (std::abs(f - 1.0) <= cfg.tol_root || hi - lo <= cfg.tol_root * mid) break;
        if (f > 1.0) lo = mid;
        else hi = mid;
    }
    const double phi = cfg.model.phi(mid);
    const auto q = ensemble.q(mid, phi, cfg.alpha);
    const double denom = 1.0 + gamma * phi * q.mean;
    result.d_star = mid;
    result.d_lo = lo;
    result.d_hi = hi;
    result.q_at_root = q.mean;
    result.mc_stderr = q.stderr_;
    result.f_residual = std::abs(f_from_q(q.mean, phi, gamma, cfg.alpha) - 1.0);
    result.f_stderr = (1.0 + cfg.alpha) / (denom * denom) * q.stderr_;
    result.predicted_weight = cfg.model.weight(mid);
    return result;
}

}  // namespace robust_scatter
