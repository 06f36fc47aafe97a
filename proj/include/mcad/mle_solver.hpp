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

#ifndef MCAD_MLE_SOLVER_HPP
#define MCAD_MLE_SOLVER_HPP

#include "mcad/geometry.hpp"
#include "mcad/rng.hpp"
#include "mcad/signatures.hpp"
#include "mcad/system_sim.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mcad {

enum class SweepOrder { Random, Cyclic };

struct SolverOptions {
    int max_sweeps = 200;
    double tol = 1e-6;        // max |step| within a sweep
    int refresh_period = 10;  // sweeps between direct inverse recomputation
    SweepOrder order = SweepOrder::Random;

    void validate() const;

    bool operator==(const SolverOptions&) const = default;
};

/// Negative log-likelihood (scaled by 1/M) summed over base stations:
///   sum_b log det Sigma_b(a) + tr(Sigma_b(a)^{-1} covs_b).
/// Throws SingularCovarianceError if some Sigma_b(a) is not positive definite.
double objective(const Eigen::VectorXd& a, const CovarianceSet& covs, const SignatureSet& sigs,
                 const GainTensor& gains);

/// Gradient of objective() with respect to a.
Eigen::VectorXd gradient(const Eigen::VectorXd& a, const CovarianceSet& covs, const SignatureSet& sigs,
                         const GainTensor& gains);

/// Per-BS data of the one-dimensional coordinate subproblem for device i:
/// gq = g_bi * s_i^H Sigma_b^{-1} s_i and gp = g_bi * s_i^H Sigma_b^{-1} covs_b Sigma_b^{-1} s_i.
struct CoordinateTerm {
    double gq = 0.0;
    double gp = 0.0;
};

/// Change of the objective when a_i moves by d:
///   sum_b log(1 + d gq_b) - d gp_b / (1 + d gq_b).
/// Returns +inf outside the domain 1 + d gq_b > 0.
double coordinate_change(std::span<const CoordinateTerm> terms, double d);
double coordinate_slope(std::span<const CoordinateTerm> terms, double d);

/// Global minimizer of coordinate_change over [lo, hi] (lo <= 0 <= hi). The
/// slope is sampled on 2B+1 uniform subintervals; every - to + sign change is
/// refined by bisection, and the best of {lo, 0, hi, refined roots} is
/// returned. Ties resolve to the zero step.
double minimize_coordinate(std::span<const CoordinateTerm> terms, double lo, double hi);

/// Iterate of the coordinate descent together with the maintained inverses
/// Sigma_b(a)^{-1}. Holds references to the problem data, which must outlive it.
class SolverState {
public:
    SolverState(const CovarianceSet& covs, const SignatureSet& sigs, const GainTensor& gains, Eigen::VectorXd a0);

    const Eigen::VectorXd& activity() const { return a_; }
    const std::vector<Eigen::MatrixXcd>& inverse_covariances() const { return inv_covs_; }

    std::vector<CoordinateTerm> coordinate_terms(int i);
    /// Moves a_i by d and applies the Sherman-Morrison update to every
    /// Sigma_b^{-1}. Uses the vectors cached by the last coordinate_terms(i).
    void apply_step(int i, double d);

    void refresh_inverses();
    /// Largest relative Frobenius distance between a maintained inverse and a
    /// freshly computed one.
    double inverse_drift() const;
    double objective() const;

    int sweep_count = 0;

private:
    const CovarianceSet* covs_;
    const SignatureSet* sigs_;
    const GainTensor* gains_;
    Eigen::VectorXd a_;
    std::vector<Eigen::MatrixXcd> inv_covs_;

    int cached_index_ = -1;
    std::vector<Eigen::VectorXcd> cached_t_;  // Sigma_b^{-1} s_i
    std::vector<double> cached_gq_;
};

/// One coordinate step: computes d*, applies it, returns it.
double coordinate_update(int i, SolverState& state);

struct SolveResult {
    ActivityPattern estimate;
    std::vector<double> objective_trace;  // after each sweep
    std::vector<double> max_step_trace;
    int sweeps = 0;
    bool converged = false;
};

/// Coordinate descent from a = 0 on the box [0, 1]^{BN}.
SolveResult solve(const CovarianceSet& covs, const SignatureSet& sigs, const GainTensor& gains,
                  const SolverOptions& opts, Rng& rng);

/// Binary decision: device i is declared active when estimate_i >= theta.
ActivityPattern threshold(const ActivityPattern& estimate, double theta);

} // namespace mcad

#endif
