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

#ifndef MCAD_ERROR_ANALYSIS_HPP
#define MCAD_ERROR_ANALYSIS_HPP

#include "mcad/geometry.hpp"
#include "mcad/mle_solver.hpp"
#include "mcad/rng.hpp"
#include "mcad/signatures.hpp"
#include "mcad/system_sim.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace mcad {

/// Fisher information J(a) = M sum_b |Q_b|^2 (elementwise), with
/// Q_b = G_b^{1/2} S^H Sigma_b(a)^{-1} S G_b^{1/2}, and its eigendecomposition.
struct FisherModel {
    Eigen::MatrixXd J;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;
    double pinv_tol = 0.0;         // absolute eigenvalue cutoff
    int antennas = 0;

    int dim() const { return static_cast<int>(J.rows()); }
    int rank() const;
    Eigen::MatrixXd pseudo_inverse() const;
};

FisherModel fisher_info(const ActivityPattern& truth, const SignatureSet& sigs, const GainTensor& gains, int antennas,
                        double rel_cutoff = 1e-10);

/// Builds the model from an explicit symmetric PSD matrix.
FisherModel make_fisher_model(Eigen::MatrixXd J, int antennas, double rel_cutoff = 1e-10);

/// Draw from N(0, M J^+).
Eigen::VectorXd pinv_sample(const FisherModel& model, Rng& rng);

struct ErrorSample {
    Eigen::VectorXd x;
    Eigen::VectorXd mu_hat;
    double objective = 0.0;     // (x - mu)^T J (x - mu) / M
    double kkt_residual = 0.0;  // measured on the unit-diagonal rescaling of J
    int sweeps = 0;
    bool converged = false;
};

struct QpOptions {
    double step_tol = 1e-10;
    int max_sweeps = 10000;
};

/// minimize (x - mu)^T J (x - mu) / M subject to signs_i * mu_i >= 0, by
/// cyclic coordinate descent on the diagonally equilibrated problem.
ErrorSample sign_constrained_qp(const Eigen::VectorXd& x, const FisherModel& model, const Eigen::VectorXd& signs,
                                const QpOptions& opts = {});

/// KKT residual of mu for the sign-constrained QP with Hessian H and target x:
/// max over i of |grad_i| where mu_i != 0, and |min(0, signs_i grad_i)| where
/// mu_i == 0, with grad = 2 H (mu - x). Infinite if mu leaves the cone.
double qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& signs);

enum class RocSource { Empirical, Theory };

const char* to_string(RocSource source);

struct RocCurve {
    RocSource source = RocSource::Theory;
    int antennas = 0;
    std::vector<double> thresholds;
    std::vector<double> pm;
    std::vector<double> pf;
    int trials = 0;         // accepted trials or samples
    int nonconverged = 0;
};

/// Counts of missed detections and false alarms of one soft estimate at one
/// threshold.
struct DetectionCounts {
    long missed = 0;
    long false_alarms = 0;
    long active = 0;
    long inactive = 0;
};

DetectionCounts count_errors(const Eigen::VectorXd& estimate, const ActivityPattern& truth, double theta);

/// Theory curve: estimates a + mu_hat / sqrt(M) with mu_hat from the QP at
/// x ~ N(0, M J^+). Sample k uses stream (seed, k). Non-converged QPs are
/// excluded and counted.
RocCurve predict_roc(const ActivityPattern& truth, const FisherModel& model, std::span<const double> thresholds,
                     int num_samples, std::uint64_t seed, unsigned threads = 1);

/// Simulated curve: per trial, fresh fading and noise, sample covariance and
/// a coordinate-descent solve. Trial k uses stream (seed, k).
RocCurve empirical_roc(const ActivityPattern& truth, const SignatureSet& sigs, const GainTensor& gains, int antennas,
                       std::span<const double> thresholds, int num_trials, const SolverOptions& opts,
                       std::uint64_t seed, unsigned threads = 1);

/// Per-trial soft estimates behind empirical_roc, in trial order.
std::vector<SolveResult> empirical_estimates(const ActivityPattern& truth, const SignatureSet& sigs,
                                             const GainTensor& gains, int antennas, int num_trials,
                                             const SolverOptions& opts, std::uint64_t seed, unsigned threads = 1);

/// Per-sample scaled errors mu_hat behind predict_roc, in sample order.
std::vector<ErrorSample> theory_samples(const ActivityPattern& truth, const FisherModel& model, int num_samples,
                                        std::uint64_t seed, unsigned threads = 1);

} // namespace mcad

#endif
