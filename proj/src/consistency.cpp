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

#include "mcad/consistency.hpp"

#include "mcad/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mcad {

Eigen::MatrixXd stacked_constraints(const LiftedSignatures& lift, const GainTensor& gains) {
    const Eigen::Index rows = lift.W.rows();
    const Eigen::Index n = lift.W.cols();
    if (n != gains.num_devices()) {
        throw ParameterError("stacked_constraints: lift and gains disagree on the number of devices");
    }
    if (!(gains.gains.maxCoeff() > 0.0)) {
        throw ParameterError("stacked_constraints: all gains are zero");
    }
    Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(rows * gains.num_cells(), n);
    for (int b = 0; b < gains.num_cells(); ++b) {
        const double peak = gains.gains.row(b).maxCoeff();
        if (!(peak > 0.0)) {
            continue;
        }
        const Eigen::VectorXd scale = gains.gains.row(b).transpose() / peak;
        stacked.middleRows(b * rows, rows) = lift.W * scale.asDiagonal();
    }
    return stacked;
}

NullspaceBasis common_nullspace(const LiftedSignatures& lift, const GainTensor& gains, double rel_tol) {
    NullspaceBasis basis;
    basis.stacked = stacked_constraints(lift, gains);
    const Eigen::Index n = basis.stacked.cols();

    // Tall matrices are reduced to their n x n triangular factor first; the
    // singular values and right singular vectors are unchanged.
    Eigen::MatrixXd reduced;
    if (basis.stacked.rows() > n) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis.stacked);
        reduced = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    } else {
        reduced = basis.stacked;
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(reduced, Eigen::ComputeFullV);
    basis.singular_values = svd.singularValues();
    const double sigma_max = basis.singular_values.size() > 0 ? basis.singular_values(0) : 0.0;
    basis.svd_tol = rel_tol * sigma_max;

    Eigen::Index rank = 0;
    while (rank < basis.singular_values.size() && basis.singular_values(rank) > basis.svd_tol) {
        ++rank;
    }
    basis.V = svd.matrixV().rightCols(n - rank);
    basis.U = svd.matrixV().leftCols(rank);
    return basis;
}

namespace {

/// Clamps a candidate onto the sign cone, normalizes it and records it as a
/// failure certificate when it passes the sign and residual checks.
void accept_certificate(const NullspaceBasis& basis, const Eigen::VectorXd& signs, Eigen::VectorXd x,
                        const ConsistencyOptions& opts, ConsistencyVerdict& verdict) {
    const double l1 = x.lpNorm<1>();
    const double worst_violation = (-signs.cwiseProduct(x)).maxCoeff();
    if (!(l1 > 0.0) || worst_violation > opts.sign_tol * l1) {
        verdict.lp_status = LpStatus::Ambiguous;
        return;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (signs(i) * x(i) < 0.0) {
            x(i) = 0.0;
        }
    }
    x /= x.lpNorm<1>();
    verdict.residual = (basis.stacked * x).lpNorm<Eigen::Infinity>();
    if (verdict.residual > opts.residual_tol) {
        verdict.lp_status = LpStatus::Ambiguous;
        return;
    }
    verdict.lp_status = LpStatus::Feasible;
    verdict.holds = false;
    verdict.certificate = std::move(x);
}

ConsistencyVerdict alternative_feasibility(const NullspaceBasis& basis, const Eigen::VectorXd& signs,
                                           const ConsistencyOptions& opts, ConsistencyVerdict verdict) {
    const Eigen::Index n = basis.U.rows();
    const Eigen::Index r = basis.U.cols();
    // Variables [y+ (r), y- (r), s (n)] >= 0 with diag(signs) U (y+ - y-) - s = 1.
    const Eigen::MatrixXd DU = signs.asDiagonal() * basis.U;
    Eigen::MatrixXd A(n, 2 * r + n);
    A << DU, -DU, -Eigen::MatrixXd::Identity(n, n);
    const LpResult lp = solve_lp(A, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(A.cols()), opts.simplex);
    verdict.phase1_objective = lp.phase1_objective;
    verdict.pivots = lp.pivots;
    if (lp.outcome == LpOutcome::IterationLimit || lp.outcome == LpOutcome::Unbounded) {
        verdict.lp_status = LpStatus::Ambiguous;
        return verdict;
    }

    if (lp.phase1_objective <= opts.alternative_gap) {
        // The separating direction w = U y must be strictly inside the dual cone.
        const Eigen::VectorXd y = lp.x.head(r) - lp.x.segment(r, r);
        const double margin = (DU * y).minCoeff();
        if (margin > 0.5) {
            verdict.lp_status = LpStatus::Infeasible;
            verdict.holds = true;
        } else {
            verdict.lp_status = LpStatus::Ambiguous;
        }
        return verdict;
    }
    if (lp.phase1_objective < 1.0 - opts.alternative_gap) {
        verdict.lp_status = LpStatus::Ambiguous;
        return verdict;
    }

    // Multipliers pi >= 0 with U^T diag(signs) pi = 0: x = diag(signs) pi lies
    // in the null space and on the cone. Project out the roundoff in the
    // row-space component before the checks.
    Eigen::VectorXd x = signs.cwiseProduct(lp.phase1_duals);
    x -= basis.U * (basis.U.transpose() * x);
    accept_certificate(basis, signs, std::move(x), opts, verdict);
    return verdict;
}

} // namespace

const char* to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Feasible:
        return "feasible";
    case LpStatus::Infeasible:
        return "infeasible";
    case LpStatus::Ambiguous:
        return "numerically_ambiguous";
    }
    return "unknown";
}

ConsistencyVerdict cone_feasibility(const NullspaceBasis& basis, const Eigen::VectorXd& signs,
                                    const ConsistencyOptions& opts) {
    const Eigen::Index n = basis.V.rows();
    const Eigen::Index d = basis.V.cols();
    if (signs.size() != n) {
        throw ParameterError("cone_feasibility: sign pattern length does not match the basis");
    }

    ConsistencyVerdict verdict;
    verdict.null_dim = static_cast<int>(d);
    if (d == 0) {
        verdict.holds = true;
        verdict.lp_status = LpStatus::Infeasible;
        return verdict;
    }

    if (opts.form == LpForm::Alternative) {
        return alternative_feasibility(basis, signs, opts, verdict);
    }

    LpResult lp;
    if (opts.form == LpForm::NullBasis) {
        // Variables [z+ (d), z- (d), t (n)] >= 0 with
        //   diag(signs) V (z+ - z-) - t = 0     (t is the sign-corrected x)
        //   1^T diag(signs) V (z+ - z-)  = 1     (l1 normalization on the cone)
        const Eigen::MatrixXd DV = signs.asDiagonal() * basis.V;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, 2 * d + n);
        A.topLeftCorner(n, d) = DV;
        A.block(0, d, n, d) = -DV;
        A.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
        const Eigen::RowVectorXd total = DV.colwise().sum();
        A.block(n, 0, 1, d) = total;
        A.block(n, d, 1, d) = -total;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
        b(n) = 1.0;
        lp = solve_lp(A, b, Eigen::VectorXd::Zero(A.cols()), opts.simplex);
        if (lp.outcome == LpOutcome::Optimal) {
            lp.x = basis.V * (lp.x.head(d) - lp.x.segment(d, d));
        }
    } else {
        const Eigen::Index r = basis.U.cols();
        Eigen::MatrixXd A(r + 1, n);
        A.topRows(r) = basis.U.transpose() * signs.asDiagonal();
        A.row(r).setOnes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(r + 1);
        b(r) = 1.0;
        lp = solve_lp(A, b, Eigen::VectorXd::Zero(n), opts.simplex);
        if (lp.outcome == LpOutcome::Optimal) {
            lp.x = signs.cwiseProduct(lp.x);
        }
    }
    verdict.phase1_objective = lp.phase1_objective;
    verdict.pivots = lp.pivots;

    if (lp.outcome == LpOutcome::IterationLimit) {
        verdict.lp_status = LpStatus::Ambiguous;
        return verdict;
    }
    if (lp.outcome == LpOutcome::Infeasible) {
        if (lp.phase1_objective < opts.ambiguous_band) {
            verdict.lp_status = LpStatus::Ambiguous;
        } else {
            verdict.lp_status = LpStatus::Infeasible;
            verdict.holds = true;
        }
        return verdict;
    }
    if (lp.outcome != LpOutcome::Optimal) {
        verdict.lp_status = LpStatus::Ambiguous;
        return verdict;
    }
    accept_certificate(basis, signs, std::move(lp.x), opts, verdict);
    return verdict;
}

ConsistencyVerdict check_consistency(const SignatureSet& sigs, const GainTensor& gains, const ActivityPattern& truth,
                                     const ConsistencyOptions& opts) {
    if (truth.size() != gains.num_devices() || sigs.count() != gains.num_devices()) {
        throw ParameterError("check_consistency: dimension mismatch");
    }
    const auto basis = common_nullspace(build_lift(sigs), gains);
    return cone_feasibility(basis, truth.cone_signs(), opts);
}

} // namespace mcad
