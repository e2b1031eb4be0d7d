#pragma once

// Core data model: datasets, symmetric matrices, sample covariances and norms.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "robust_scatter/error.hpp"

namespace robust_scatter {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Descriptive record of where a dataset came from. Never read by numerics.
struct Provenance {
    std::string family;
    std::optional<std::uint64_t> seed;
    std::string shape;
    std::string mean;
};

/// n x p sample matrix, one observation per row.
class Dataset {
public:
    explicit Dataset(Matrix samples, std::optional<Provenance> provenance = std::nullopt)
        : samples_(std::move(samples)), provenance_(std::move(provenance)) {
        require(samples_.rows() >= 1 && samples_.cols() >= 1, ErrorCode::invalid_argument,
                "dataset needs at least one row and one column");
        require(samples_.allFinite(), ErrorCode::invalid_argument,
                "dataset contains non-finite entries");
    }

    std::size_t n() const { return static_cast<std::size_t>(samples_.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(samples_.cols()); }
    double gamma() const { return static_cast<double>(p()) / static_cast<double>(n()); }

    const Matrix& samples() const { return samples_; }
    Vector row(std::size_t i) const { return samples_.row(static_cast<Eigen::Index>(i)).transpose(); }

    const std::optional<Provenance>& provenance() const { return provenance_; }
    Dataset with_provenance(Provenance prov) const { return Dataset(samples_, std::move(prov)); }

private:
    Matrix samples_;
    std::optional<Provenance> provenance_;
};

/// (M + M^T) / 2.
inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Real symmetric p x p matrix; symmetrized on construction.
class ScatterMatrix {
public:
    explicit ScatterMatrix(const Matrix& entries) {
        require(entries.rows() == entries.cols() && entries.rows() >= 1,
                ErrorCode::dimension_mismatch, "scatter matrix must be square and non-empty");
        require(entries.allFinite(), ErrorCode::invalid_argument,
                "scatter matrix contains non-finite entries");
        entries_ = symmetrized(entries);
    }

    static ScatterMatrix identity(std::size_t p) {
        const auto dim = static_cast<Eigen::Index>(p);
        return ScatterMatrix(Matrix::Identity(dim, dim));
    }

    std::size_t p() const { return static_cast<std::size_t>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    double operator()(std::size_t i, std::size_t j) const {
        return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    double trace() const { return entries_.trace(); }
    /// Normalized trace p^{-1} Tr M.
    double tau() const { return trace() / static_cast<double>(p()); }

    /// Positive definiteness by attempting a Cholesky factorization.
    bool is_spd() const {
        Eigen::LLT<Matrix> llt(entries_);
        return llt.info() == Eigen::Success;
    }

private:
    Matrix entries_;
};

/// Cholesky factor of an SPD matrix, or Error(not_spd).
inline Eigen::LLT<Matrix> spd_factor(const Matrix& m, const char* what = "matrix") {
    Eigen::LLT<Matrix> llt(m);
    require(llt.info() == Eigen::Success, ErrorCode::not_spd,
            std::string(what) + " is not symmetric positive definite");
    return llt;
}

struct NormReport {
    double max_norm = 0.0;
    double l1_norm = 0.0;
    double operator_norm = 0.0;
};

/// S = (1/n) X^T X.
inline ScatterMatrix sample_covariance(const Dataset& data) {
    const Matrix& x = data.samples();
    Matrix s = Matrix::Zero(x.cols(), x.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(data.n()));
    return ScatterMatrix(s.selfadjointView<Eigen::Lower>());
}

/// S_{-j} = S - (1/n) x_j x_j^T, keeping the 1/n normalization of the full sample.
inline ScatterMatrix leave_one_out_covariance(const Dataset& data, std::size_t j) {
    require(j < data.n(), ErrorCode::index_out_of_range,
            "leave-one-out index " + std::to_string(j) + " out of range for n=" + std::to_string(data.n()));
    const Matrix& x = data.samples();
    Matrix s = Matrix::Zero(x.cols(), x.cols());
    const double scale = 1.0 / static_cast<double>(data.n());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (i == static_cast<Eigen::Index>(j)) continue;
        s.selfadjointView<Eigen::Lower>().rankUpdate(x.row(i).transpose(), scale);
    }
    return ScatterMatrix(s.selfadjointView<Eigen::Lower>());
}

inline NormReport matrix_norms(const Matrix& m) {
    require(m.allFinite(), ErrorCode::invalid_argument, "matrix_norms: non-finite entries");
    NormReport report;
    if (m.size() == 0) return report;
    report.max_norm = m.cwiseAbs().maxCoeff();
    report.l1_norm = m.cwiseAbs().sum();
    Eigen::JacobiSVD<Matrix> svd(m);
    report.operator_norm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    return report;
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
inline double symmetric_operator_norm(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace robust_scatter
