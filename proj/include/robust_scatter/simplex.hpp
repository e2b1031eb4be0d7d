#pragma once

// Dense two-phase tableau simplex with Bland's anti-cycling rule.
//
//   minimize c^T x  subject to  A x <= b,  x >= 0
//
// Rows with negative right-hand side are negated into >= form and given an
// artificial variable for phase one. The final basic solution is recomputed
// from the original data with an LU solve to shed accumulated tableau error.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "robust_scatter/error.hpp"
#include "robust_scatter/scatter_model.hpp"

namespace robust_scatter {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

class DenseSimplex {
public:
    DenseSimplex(const Matrix& a, const Vector& b, const Vector& c) : a_(a), b_(b), c_(c) {
        require(a.rows() == b.size() && a.cols() == c.size(), ErrorCode::dimension_mismatch,
                "LP dimensions are inconsistent");
        require(a.allFinite() && b.allFinite() && c.allFinite(), ErrorCode::invalid_argument,
                "LP data must be finite");
    }

    LpResult solve(std::size_t max_pivots = 200000) {
        build_tableau();
        LpResult result;
        if (artificial_count_ > 0) {
            // Phase one: minimize the sum of artificials.
            Vector phase1 = Vector::Zero(total_cols_);
            for (Eigen::Index j = first_artificial_; j < total_cols_; ++j) phase1(j) = 1.0;
            set_objective(phase1);
            const LpStatus s = iterate(max_pivots, total_cols_, result.pivots);
            if (s == LpStatus::iteration_limit) return with_status(result, s);
            if (-t_(m_, rhs_col()) > feasibility_tol()) return with_status(result, LpStatus::infeasible);
            drive_out_artificials(result.pivots);
        }
        set_objective(phase2_costs());
        const LpStatus s = iterate(max_pivots, first_artificial_, result.pivots);
        if (s != LpStatus::optimal) return with_status(result, s);
        result.status = LpStatus::optimal;
        result.x = polished_solution();
        result.objective = c_.dot(result.x);
        return result;
    }

private:
    static constexpr double pivot_tol = 1e-11;
    static constexpr double cost_tol = 1e-12;

    double feasibility_tol() const { return 1e-9 * std::max(1.0, b_.cwiseAbs().maxCoeff()); }
    Eigen::Index rhs_col() const { return total_cols_; }

    static LpResult with_status(LpResult r, LpStatus s) {
        r.status = s;
        return r;
    }

    void build_tableau() {
        m_ = a_.rows();
        n_ = a_.cols();
        artificial_count_ = 0;
        for (Eigen::Index i = 0; i < m_; ++i)
            if (b_(i) < 0.0) ++artificial_count_;
        first_artificial_ = n_ + m_;
        total_cols_ = first_artificial_ + artificial_count_;
        t_ = Matrix::Zero(m_ + 1, total_cols_ + 1);
        basis_.assign(static_cast<std::size_t>(m_), 0);
        std_a_ = Matrix::Zero(m_, first_artificial_);
        std_b_ = Vector::Zero(m_);
        Eigen::Index next_artificial = first_artificial_;
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double sign = b_(i) < 0.0 ? -1.0 : 1.0;
            std_a_.row(i).head(n_) = sign * a_.row(i);
            std_a_(i, n_ + i) = sign;
            std_b_(i) = sign * b_(i);
            t_.row(i).head(first_artificial_) = std_a_.row(i);
            t_(i, rhs_col()) = std_b_(i);
            if (sign > 0.0) {
                basis_[static_cast<std::size_t>(i)] = n_ + i;
            } else {
                t_(i, next_artificial) = 1.0;
                basis_[static_cast<std::size_t>(i)] = next_artificial++;
            }
        }
    }

    Vector phase2_costs() const {
        Vector costs = Vector::Zero(total_cols_);
        costs.head(n_) = c_;
        return costs;
    }

    // Objective row holds reduced costs; its rhs entry holds -objective.
    void set_objective(const Vector& costs) {
        t_.row(m_).setZero();
        t_.row(m_).head(total_cols_) = costs.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = costs(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double factor = t_(i, col);
            if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
        }
        basis_[static_cast<std::size_t>(row)] = col;
    }

    // Bland: lowest-index improving column enters; ratio ties go to the
    // lowest-index basic variable.
    LpStatus iterate(std::size_t max_pivots, Eigen::Index allowed_cols, std::size_t& pivots) {
        for (;;) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed_cols; ++j) {
                if (t_(m_, j) < -cost_tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double coef = t_(i, enter);
                if (coef <= pivot_tol) continue;
                const double ratio = t_(i, rhs_col()) / coef;
                if (ratio < best - 1e-14 ||
                    (std::abs(ratio - best) <= 1e-14 && basis_[static_cast<std::size_t>(i)] <
                                                            basis_[static_cast<std::size_t>(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            if (pivots++ >= max_pivots) return LpStatus::iteration_limit;
            pivot(leave, enter);
        }
    }

    void drive_out_artificials(std::size_t& pivots) {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < first_artificial_) continue;
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < first_artificial_; ++j) {
                if (std::abs(t_(i, j)) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                pivot(i, col);
                ++pivots;
            }
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
    }

    Vector polished_solution() const {
        std::vector<Eigen::Index> cols;
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < first_artificial_) {
                cols.push_back(basis_[static_cast<std::size_t>(i)]);
                rows.push_back(i);
            }
        }
        Vector z = Vector::Zero(first_artificial_);
        if (cols.size() == static_cast<std::size_t>(m_)) {
            Matrix basis(m_, m_);
            for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = std_a_.col(cols[k]);
            Eigen::PartialPivLU<Matrix> lu(basis);
            const Vector xb = lu.solve(std_b_);
            if (xb.allFinite() && (basis * xb - std_b_).cwiseAbs().maxCoeff() <= feasibility_tol()) {
                for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = std::max(0.0, xb(static_cast<Eigen::Index>(k)));
                return z.head(n_);
            }
        }
        for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = std::max(0.0, t_(rows[k], rhs_col()));
        return z.head(n_);
    }

    Matrix a_;
    Vector b_;
    Vector c_;
    Eigen::Index m_ = 0;
    Eigen::Index n_ = 0;
    Eigen::Index artificial_count_ = 0;
    Eigen::Index first_artificial_ = 0;
    Eigen::Index total_cols_ = 0;
    Matrix t_;
    Matrix std_a_;
    Vector std_b_;
    std::vector<Eigen::Index> basis_;
};

/// minimize c^T x subject to A x <= b, x >= 0.
inline LpResult solve_lp(const Matrix& a, const Vector& b, const Vector& c) {
    DenseSimplex simplex(a, b, c);
    return simplex.solve();
}

}  // namespace robust_scatter
