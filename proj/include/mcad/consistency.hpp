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

#ifndef MCAD_CONSISTENCY_HPP
#define MCAD_CONSISTENCY_HPP

#include "mcad/geometry.hpp"
#include "mcad/signatures.hpp"
#include "mcad/simplex.hpp"
#include "mcad/system_sim.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>

namespace mcad {

/// Row-balanced stacked constraint matrix [W diag(g_b) / max(g_b)]_b of size
/// (B L^2) x (B N). Its null space is the identifiability subspace
/// {x : S_tilde G_b x = 0 for all b}.
Eigen::MatrixXd stacked_constraints(const LiftedSignatures& lift, const GainTensor& gains);

struct NullspaceBasis {
    Eigen::MatrixXd V;        // (B N) x d, orthonormal columns
    Eigen::MatrixXd U;        // (B N) x (B N - d), orthonormal complement of V
    Eigen::MatrixXd stacked;  // the balanced matrix the basis was computed from
    Eigen::VectorXd singular_values;
    double svd_tol = 0.0;     // absolute cutoff used, rel_tol * sigma_max

    int dim() const { return static_cast<int>(V.cols()); }
};

NullspaceBasis common_nullspace(const LiftedSignatures& lift, const GainTensor& gains, double rel_tol = 1e-9);

enum class LpStatus { Feasible, Infeasible, Ambiguous };

const char* to_string(LpStatus status);

/// NullBasis: variables z in R^d, x = V z, sign and l1 constraints on x.
/// RowSpace: variables t = diag(signs) x >= 0 with U^T diag(signs) t = 0 and
/// sum(t) = 1. Same feasibility set, (B N - d + 1) rows instead of (B N + 1).
/// Alternative: the Gordan system diag(signs) U y >= 1. It is feasible iff the
/// intersection is {0}; its phase-1 optimum is 0 or at least 1, and the phase-1
/// multipliers are a point of the intersection when it is not.
enum class LpForm { NullBasis, RowSpace, Alternative };

struct ConsistencyOptions {
    LpForm form = LpForm::Alternative;
    SimplexOptions simplex{};
    double ambiguous_band = 1e-7;   // phase-1 optima in (feasibility_tol, band) are ambiguous
    double alternative_gap = 1e-3;  // Alternative form: phase-1 optima in (gap, 1 - gap) are ambiguous
    double sign_tol = 1e-9;         // relative to ||x||_1
    double residual_tol = 1e-7;     // ||stacked x||_inf of a certificate
};

/// holds == true iff the subspace meets the sign cone only at zero. When the
/// LP finds a nonzero point of the intersection, holds == false and
/// `certificate` carries it, exactly sign-feasible with unit l1 norm.
struct ConsistencyVerdict {
    std::optional<bool> holds;
    Eigen::VectorXd certificate;
    int null_dim = 0;
    LpStatus lp_status = LpStatus::Infeasible;
    double residual = 0.0;
    double phase1_objective = 0.0;
    int pivots = 0;
};

/// `signs` holds +1 for inactive indices (x_i >= 0) and -1 for active ones.
ConsistencyVerdict cone_feasibility(const NullspaceBasis& basis, const Eigen::VectorXd& signs,
                                    const ConsistencyOptions& opts = {});

ConsistencyVerdict check_consistency(const SignatureSet& sigs, const GainTensor& gains, const ActivityPattern& truth,
                                     const ConsistencyOptions& opts = {});

} // namespace mcad

#endif
