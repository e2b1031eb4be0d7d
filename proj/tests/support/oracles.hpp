#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical routines.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// (1/n) sum_i x_i x_i^T by explicit triple loop.
inline Matrix brute_force_covariance(const Matrix& x) {
    const auto n = x.rows(), p = x.cols();
    Matrix s = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b) s(a, b) += x(i, a) * x(i, b);
    return s / static_cast<double>(n);
}

/// Largest singular value by power iteration on M^T M.
inline double power_iteration_norm(const Matrix& m, int iterations = 5000) {
    Vector v = Vector::Ones(m.cols()) / std::sqrt(static_cast<double>(m.cols()));
    double sigma = 0.0;
    for (int k = 0; k < iterations; ++k) {
        Vector w = m.transpose() * (m * v);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        sigma = std::sqrt(norm);
    }
    return sigma;
}

/// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14) {
    double flo = f(lo);
    for (int k = 0; k < 400 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
    return m;
}

/// Q diag(s) R with random orthogonal Q, R and singular values spread
/// log-uniformly in [1, cond].
inline Matrix random_full_rank(std::size_t p, double cond, std::uint64_t seed) {
    const Matrix g1 = random_gaussian(p, p, seed);
    const Matrix g2 = random_gaussian(p, p, seed + 7919);
    const Matrix q1 = Eigen::HouseholderQR<Matrix>(g1).householderQ();
    const Matrix q2 = Eigen::HouseholderQR<Matrix>(g2).householderQ();
    Vector s(static_cast<Eigen::Index>(p));
    for (Eigen::Index k = 0; k < s.size(); ++k)
        s(k) = std::pow(cond, p > 1 ? static_cast<double>(k) / static_cast<double>(p - 1) : 0.0);
    return q1 * s.asDiagonal() * q2;
}

/// Random SPD matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(std::size_t p, double lo, double hi, std::uint64_t seed) {
    const Matrix g = random_gaussian(p, p, seed);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> unif(lo, hi);
    Vector ev(static_cast<Eigen::Index>(p));
    for (auto& e : ev) e = unif(rng);
    Matrix s = q * ev.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

/// Optimal value of min ||w||_1 s.t. ||S w - e_j||_inf <= lambda by enumerating
/// the basic solutions of the standard-form program
///   [S -S I 0; -S S 0 I] (w+, w-, s1, s2) = (lambda + e_j, lambda - e_j), all >= 0.
/// Bases holding both w+_k and w-_k are singular and skipped.
struct VertexOracleResult {
    double objective = std::numeric_limits<double>::infinity();
    Vector w;
    std::size_t vertices = 0;
};

inline VertexOracleResult clime_vertex_enumeration(const Matrix& s, std::size_t j, double lambda) {
    const auto p = s.rows();
    const Eigen::Index m = 2 * p;
    Matrix a = Matrix::Zero(m, 4 * p);
    a.block(0, 0, p, p) = s;
    a.block(0, p, p, p) = -s;
    a.block(p, 0, p, p) = -s;
    a.block(p, p, p, p) = s;
    a.block(0, 2 * p, m, m) = Matrix::Identity(m, m);
    Vector b(m);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double e = k == static_cast<Eigen::Index>(j) ? 1.0 : 0.0;
        b(k) = lambda + e;
        b(p + k) = lambda - e;
    }

    VertexOracleResult best;
    // sign pattern per coordinate: 0 none, 1 plus column, 2 minus column
    std::vector<int> pattern(static_cast<std::size_t>(p), 0);
    std::vector<Eigen::Index> cols;
    const auto try_basis = [&](const std::vector<Eigen::Index>& basis) {
        Matrix bm(m, m);
        for (Eigen::Index k = 0; k < m; ++k) bm.col(k) = a.col(basis[static_cast<std::size_t>(k)]);
        Eigen::FullPivLU<Matrix> lu(bm);
        if (lu.rank() < m) return;
        const Vector xb = lu.solve(b);
        if ((bm * xb - b).cwiseAbs().maxCoeff() > 1e-9) return;
        if (xb.minCoeff() < -1e-10) return;
        ++best.vertices;
        Vector w = Vector::Zero(p);
        double obj = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index c = basis[static_cast<std::size_t>(k)];
            const double v = std::max(0.0, xb(k));
            if (c < p) {
                w(c) += v;
                obj += v;
            } else if (c < 2 * p) {
                w(c - p) -= v;
                obj += v;
            }
        }
        if (obj < best.objective) {
            best.objective = obj;
            best.w = w;
        }
    };

    std::function<void(Eigen::Index)> choose_signs = [&](Eigen::Index k) {
        if (k == p) {
            std::vector<Eigen::Index> structural;
            for (Eigen::Index c = 0; c < p; ++c) {
                if (pattern[static_cast<std::size_t>(c)] == 1) structural.push_back(c);
                if (pattern[static_cast<std::size_t>(c)] == 2) structural.push_back(p + c);
            }
            const auto need = static_cast<std::size_t>(m) - structural.size();
            // choose `need` slack columns out of m
            std::vector<Eigen::Index> slacks;
            std::function<void(Eigen::Index)> choose_slacks = [&](Eigen::Index start) {
                if (slacks.size() == need) {
                    std::vector<Eigen::Index> basis = structural;
                    for (Eigen::Index sidx : slacks) basis.push_back(2 * p + sidx);
                    try_basis(basis);
                    return;
                }
                for (Eigen::Index sidx = start; sidx < m; ++sidx) {
                    if (static_cast<std::size_t>(m - sidx) < need - slacks.size()) break;
                    slacks.push_back(sidx);
                    choose_slacks(sidx + 1);
                    slacks.pop_back();
                }
            };
            choose_slacks(0);
            return;
        }
        for (int sgn = 0; sgn < 3; ++sgn) {
            pattern[static_cast<std::size_t>(k)] = sgn;
            choose_signs(k + 1);
        }
    };
    choose_signs(0);
    return best;
}

/// Plain fixed-point iteration with explicit inverses. kind: 0 Tyler (trace p),
/// 1 Maronna with u, 2 regularized Tyler, 3 regularized Maronna with u.
inline Matrix naive_fixed_point(const Matrix& x, int kind, double alpha,
                                const std::function<double(double)>& u, double tol = 1e-12,
                                int max_iter = 20000) {
    const auto n = x.rows(), p = x.cols();
    Matrix sigma = Matrix::Identity(p, p);
    for (int it = 0; it < max_iter; ++it) {
        const Matrix inv = sigma.inverse();
        Matrix next = Matrix::Zero(p, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector xi = x.row(i).transpose();
            const double d = xi.dot(inv * xi) / static_cast<double>(p);
            const double w = (kind == 0 || kind == 2) ? 1.0 / d : u(d);
            next += w * xi * xi.transpose();
        }
        next /= static_cast<double>(n);
        if (kind == 0) next *= static_cast<double>(p) / next.trace();
        if (kind >= 2) next = (next + alpha * Matrix::Identity(p, p)) / (1.0 + alpha);
        next = 0.5 * (next + next.transpose());
        const double change = (next - sigma).norm() / sigma.norm();
        sigma = next;
        if (change < tol) break;
    }
    return sigma;
}

/// d_i = p^{-1} x_i^T M^{-1} x_i with an explicit inverse.
inline Vector naive_forms(const Matrix& x, const Matrix& m) {
    const Matrix inv = m.inverse();
    Vector d(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vector xi = x.row(i).transpose();
        d(i) = xi.dot(inv * xi) / static_cast<double>(x.cols());
    }
    return d;
}

}  // namespace oracles
