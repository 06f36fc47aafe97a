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

#ifndef MCAD_SIMPLEX_HPP
#define MCAD_SIMPLEX_HPP

#include <Eigen/Dense>

namespace mcad {

enum class LpOutcome { Optimal, Infeasible, Unbounded, IterationLimit };

struct SimplexOptions {
    double pivot_tol = 1e-9;        // smallest admissible pivot / reduced-cost magnitude
    double feasibility_tol = 1e-9;  // phase-1 optimum below this counts as feasible
    int max_pivots = 100000;
    int bland_after = 50;           // consecutive degenerate pivots before Bland's rule
};

struct LpResult {
    LpOutcome outcome = LpOutcome::IterationLimit;
    Eigen::VectorXd x;              // optimum, or the phase-1 point when not Optimal
    double objective = 0.0;
    double phase1_objective = 0.0;  // sum of artificials at the end of phase 1
    Eigen::VectorXd phase1_duals;   // row multipliers y of phase 1: y^T A <= 0, y^T b = phase1_objective
    int pivots = 0;
};

/// Dense two-phase primal simplex for
///   minimize c^T x  subject to  A x = b,  x >= 0.
/// Pricing is Dantzig's rule, falling back to Bland's rule after a run of
/// degenerate pivots so the method cannot cycle.
/// Phase 1 starts from a full artificial basis; artificials left in the basis
/// at zero level are pivoted out or their rows dropped as redundant.
LpResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const SimplexOptions& opts = {});

} // namespace mcad

#endif
