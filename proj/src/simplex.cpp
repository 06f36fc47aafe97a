// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mcad/simplex.hpp"

#include "mcad/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mcad {

namespace {

constexpr double kRatioTieTol = 1e-12;

class Tableau {
public:
    Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) : m_(A.rows()), n_(A.cols()) {
        T_.setZero(m_ + 1, n_ + m_ + 1);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double sign = b(i) < 0.0 ? -1.0 : 1.0;
            row_sign_.push_back(sign);
            T_.row(i).head(n_) = sign * A.row(i);
            T_(i, n_ + i) = 1.0;
            T_(i, rhs()) = sign * b(i);
        }
        basis_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            basis_[i] = n_ + i;
        }
        active_rows_.assign(m_, true);
    }

    Eigen::Index rhs() const { return n_ + m_; }
    Eigen::Index cost_row() const { return m_; }

    /// Loads objective row: reduced costs for cost vector `cost` over all
    /// structural + artificial columns, given the current basis.
    void set_objective(const Eigen::VectorXd& cost) {
        T_.row(cost_row()).setZero();
        T_.row(cost_row()).head(cost.size()) = cost.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (!active_rows_[i]) {
                continue;
            }
            const double cb = basis_[i] < cost.size() ? cost(basis_[i]) : 0.0;
            if (cb != 0.0) {
                T_.row(cost_row()) -= cb * T_.row(i);
            }
        }
    }

    /// Dantzig pricing (most negative reduced cost) while the objective
    /// improves; after `bland_after` consecutive degenerate pivots the rule
    /// switches to Bland's (lowest-index entering column, lowest basis index on
    /// ratio ties) until a strictly improving pivot occurs. Bland's rule
    /// cannot cycle, so the method terminates.
    LpOutcome iterate(Eigen::Index column_limit, const SimplexOptions& opts, int& pivots) {
        int degenerate_run = 0;
        while (true) {
            const bool bland = degenerate_run >= opts.bland_after;
            Eigen::Index entering = -1;
            double most_negative = -opts.pivot_tol;
            for (Eigen::Index j = 0; j < column_limit; ++j) {
                const double rc = T_(cost_row(), j);
                if (rc < most_negative) {
                    entering = j;
                    if (bland) {
                        break;
                    }
                    most_negative = rc;
                }
            }
            if (entering < 0) {
                return LpOutcome::Optimal;
            }

            Eigen::Index leaving = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = T_(i, entering);
                if (!active_rows_[i] || a <= opts.pivot_tol) {
                    continue;
                }
                const double ratio = std::max(T_(i, rhs()), 0.0) / a;
                if (leaving < 0 || ratio < best_ratio - kRatioTieTol) {
                    best_ratio = ratio;
                    leaving = i;
                } else if (ratio <= best_ratio + kRatioTieTol) {
                    const bool prefer = bland ? basis_[i] < basis_[leaving] : a > T_(leaving, entering);
                    if (prefer) {
                        best_ratio = std::min(best_ratio, ratio);
                        leaving = i;
                    }
                }
            }
            if (leaving < 0) {
                return LpOutcome::Unbounded;
            }
            if (pivots >= opts.max_pivots) {
                return LpOutcome::IterationLimit;
            }
            const double before = objective_value();
            pivot(leaving, entering);
            ++pivots;
            degenerate_run = objective_value() < before - opts.pivot_tol * 1e-3 ? 0 : degenerate_run + 1;
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        T_.row(row) /= T_(row, col);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i != row && T_(i, col) != 0.0) {
                T_.row(i) -= T_(i, col) * T_.row(row);
            }
        }
        // Keep the pivot column an exact unit vector.
        T_.col(col).setZero();
        T_(row, col) = 1.0;
        basis_[row] = col;
    }

    /// Pivots zero-level artificials out of the basis; rows without any
    /// usable structural entry are redundant and deactivated.
    void expel_artificials(const SimplexOptions& opts, int& pivots) {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (!active_rows_[i] || basis_[i] < n_) {
                continue;
            }
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (std::abs(T_(i, j)) > opts.pivot_tol) {
                    col = j;
                    break;
                }
            }
            if (col < 0) {
                active_rows_[i] = false;
            } else {
                pivot(i, col);
                ++pivots;
            }
        }
    }

    double objective_value() const { return -T_(cost_row(), rhs()); }

    /// Row multipliers of the loaded objective, read off the reduced costs of
    /// the artificial columns (each with unit cost in phase 1).
    Eigen::VectorXd phase1_duals() const {
        Eigen::VectorXd pi(m_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            pi(i) = row_sign_[i] * (1.0 - T_(cost_row(), n_ + i));
        }
        return pi;
    }

    Eigen::VectorXd solution() const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (active_rows_[i] && basis_[i] < n_) {
                x(basis_[i]) = T_(i, rhs());
            }
        }
        return x;
    }

private:
    Eigen::Index m_;
    Eigen::Index n_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;
    std::vector<Eigen::Index> basis_;
    std::vector<bool> active_rows_;
    std::vector<double> row_sign_;
};

} // namespace

LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const SimplexOptions& opts) {
    if (A.rows() != b.size() || A.cols() != c.size()) {
        throw ParameterError("solve_lp: dimension mismatch");
    }
    const Eigen::Index m = A.rows();
    const Eigen::Index n = A.cols();

    Tableau tableau(A, b);
    LpResult result;

    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
    phase1_cost.tail(m).setOnes();
    tableau.set_objective(phase1_cost);
    const LpOutcome phase1 = tableau.iterate(n, opts, result.pivots);
    result.phase1_objective = tableau.objective_value();
    result.phase1_duals = tableau.phase1_duals();
    result.x = tableau.solution();
    if (phase1 == LpOutcome::IterationLimit) {
        result.outcome = phase1;
        return result;
    }
    if (result.phase1_objective > opts.feasibility_tol) {
        result.outcome = LpOutcome::Infeasible;
        return result;
    }

    tableau.expel_artificials(opts, result.pivots);
    tableau.set_objective(c);
    result.outcome = tableau.iterate(n, opts, result.pivots);
    result.x = tableau.solution();
    result.objective = c.dot(result.x);
    return result;
}

} // namespace mcad
