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

#include "mcad/mle_solver.hpp"

#include "mcad/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcad {

namespace {

void check_problem(const Eigen::VectorXd& a, const CovarianceSet& covs, const SignatureSet& sigs,
                   const GainTensor& gains) {
    if (a.size() != gains.num_devices() || sigs.count() != gains.num_devices() ||
        covs.num_cells() != gains.num_cells()) {
        throw ParameterError("mle: dimension mismatch between activity, covariances, signatures and gains");
    }
    for (const auto& C : covs.matrices) {
        if (C.rows() != sigs.length() || C.cols() != sigs.length()) {
            throw ParameterError("mle: covariance size does not match sequence length");
        }
    }
}

Eigen::LLT<Eigen::MatrixXcd> factor(const Eigen::MatrixXcd& sigma) {
    Eigen::LLT<Eigen::MatrixXcd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw SingularCovarianceError("mle: model covariance is not positive definite");
    }
    // LLT only checks the sign of pivots it encounters; an exactly zero
    // pivot slips through.
    if ((llt.matrixLLT().diagonal().real().array() <= 0.0).any()) {
        throw SingularCovarianceError("mle: model covariance is singular");
    }
    return llt;
}

Eigen::MatrixXcd direct_inverse(const Eigen::MatrixXcd& sigma) {
    const auto llt = factor(sigma);
    return llt.solve(Eigen::MatrixXcd::Identity(sigma.rows(), sigma.cols()));
}

constexpr double kBisectionWidth = 1e-10;

} // namespace

void SolverOptions::validate() const {
    if (max_sweeps < 1 || !(tol > 0.0) || refresh_period < 1) {
        throw ParameterError("solver options: max_sweeps, tol and refresh_period must be positive");
    }
}

double objective(const Eigen::VectorXd& a, const CovarianceSet& covs, const SignatureSet& sigs,
                 const GainTensor& gains) {
    check_problem(a, covs, sigs, gains);
    double total = 0.0;
    for (int b = 0; b < gains.num_cells(); ++b) {
        const auto llt = factor(model_covariance_at(sigs, gains, a, b));
        const auto diag = llt.matrixLLT().diagonal().real();
        total += 2.0 * diag.array().log().sum();
        total += llt.solve(covs.matrices[b]).trace().real();
    }
    return total;
}

Eigen::VectorXd gradient(const Eigen::VectorXd& a, const CovarianceSet& covs, const SignatureSet& sigs,
                         const GainTensor& gains) {
    check_problem(a, covs, sigs, gains);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(a.size());
    for (int b = 0; b < gains.num_cells(); ++b) {
        const auto llt = factor(model_covariance_at(sigs, gains, a, b));
        const Eigen::MatrixXcd T = llt.solve(sigs.S);              // Sigma^{-1} S
        const Eigen::MatrixXcd U = covs.matrices[b] * T;            // SigmaHat Sigma^{-1} S
        for (int i = 0; i < a.size(); ++i) {
            const double q = sigs.S.col(i).dot(T.col(i)).real();
            const double p = T.col(i).dot(U.col(i)).real();
            grad(i) += gains.gains(b, i) * (q - p);
        }
    }
    return grad;
}

double coordinate_change(std::span<const CoordinateTerm> terms, double d) {
    double total = 0.0;
    for (const auto& t : terms) {
        const double x = d * t.gq;
        if (!(1.0 + x > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        total += std::log1p(x) - d * t.gp / (1.0 + x);
    }
    return total;
}

double coordinate_slope(std::span<const CoordinateTerm> terms, double d) {
    double total = 0.0;
    for (const auto& t : terms) {
        const double denom = 1.0 + d * t.gq;
        total += t.gq / denom - t.gp / (denom * denom);
    }
    return total;
}

double minimize_coordinate(std::span<const CoordinateTerm> terms, double lo, double hi) {
    const bool flat = std::all_of(terms.begin(), terms.end(), [](const CoordinateTerm& t) {
        return t.gq == 0.0 && t.gp == 0.0;
    });
    if (flat || !(hi > lo)) {
        return 0.0;
    }

    std::vector<double> candidates{lo, hi};
    const int intervals = 2 * static_cast<int>(terms.size()) + 1;
    const double width = (hi - lo) / intervals;

    double left = lo;
    double slope_left = coordinate_slope(terms, left);
    for (int k = 1; k <= intervals; ++k) {
        const double right = (k == intervals) ? hi : lo + k * width;
        const double slope_right = coordinate_slope(terms, right);
        if (slope_right == 0.0) {
            candidates.push_back(right);
        } else if (slope_left < 0.0 && slope_right > 0.0) {
            double a = left;
            double b = right;
            while (b - a > kBisectionWidth) {
                const double mid = 0.5 * (a + b);
                if (coordinate_slope(terms, mid) < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            candidates.push_back(0.5 * (a + b));
        }
        left = right;
        slope_left = slope_right;
    }

    double best = 0.0;
    double best_value = 0.0;
    for (double c : candidates) {
        const double value = coordinate_change(terms, c);
        if (value < best_value) {
            best = c;
            best_value = value;
        }
    }
    return best;
}

SolverState::SolverState(const CovarianceSet& covs, const SignatureSet& sigs, const GainTensor& gains,
                         Eigen::VectorXd a0)
    : covs_(&covs), sigs_(&sigs), gains_(&gains), a_(std::move(a0)) {
    check_problem(a_, covs, sigs, gains);
    if ((a_.array() < 0.0).any() || (a_.array() > 1.0).any()) {
        throw ParameterError("SolverState: initial activity outside [0, 1]");
    }
    cached_t_.resize(gains.num_cells());
    cached_gq_.resize(gains.num_cells());
    refresh_inverses();
}

void SolverState::refresh_inverses() {
    inv_covs_.clear();
    for (int b = 0; b < gains_->num_cells(); ++b) {
        inv_covs_.push_back(direct_inverse(model_covariance_at(*sigs_, *gains_, a_, b)));
    }
    cached_index_ = -1;
}

double SolverState::inverse_drift() const {
    double worst = 0.0;
    for (int b = 0; b < gains_->num_cells(); ++b) {
        const Eigen::MatrixXcd direct = direct_inverse(model_covariance_at(*sigs_, *gains_, a_, b));
        worst = std::max(worst, (inv_covs_[b] - direct).norm() / direct.norm());
    }
    return worst;
}

double SolverState::objective() const {
    return mcad::objective(a_, *covs_, *sigs_, *gains_);
}

std::vector<CoordinateTerm> SolverState::coordinate_terms(int i) {
    const int cells = gains_->num_cells();
    std::vector<CoordinateTerm> terms(cells);
    const auto s = sigs_->S.col(i);
    for (int b = 0; b < cells; ++b) {
        const double g = gains_->gains(b, i);
        if (g == 0.0) {
            cached_t_[b].resize(0);
            cached_gq_[b] = 0.0;
            continue;
        }
        cached_t_[b].noalias() = inv_covs_[b] * s;
        const double q = s.dot(cached_t_[b]).real();
        const double p = cached_t_[b].dot(covs_->matrices[b] * cached_t_[b]).real();
        terms[b] = {g * q, g * p};
        cached_gq_[b] = g * q;
    }
    cached_index_ = i;
    return terms;
}

void SolverState::apply_step(int i, double d) {
    if (d == 0.0) {
        return;
    }
    if (cached_index_ != i) {
        coordinate_terms(i);
    }
    for (int b = 0; b < gains_->num_cells(); ++b) {
        if (cached_t_[b].size() == 0) {
            continue;
        }
        const double g = gains_->gains(b, i);
        const double scale = d * g / (1.0 + d * cached_gq_[b]);
        inv_covs_[b].noalias() -= scale * cached_t_[b] * cached_t_[b].adjoint();
    }
    a_(i) = std::clamp(a_(i) + d, 0.0, 1.0);
    cached_index_ = -1;
}

double coordinate_update(int i, SolverState& state) {
    const auto terms = state.coordinate_terms(i);
    const double ai = state.activity()(i);
    const double d = minimize_coordinate(terms, -ai, 1.0 - ai);
    state.apply_step(i, d);
    return d;
}

SolveResult solve(const CovarianceSet& covs, const SignatureSet& sigs, const GainTensor& gains,
                  const SolverOptions& opts, Rng& rng) {
    opts.validate();
    SolverState state(covs, sigs, gains, Eigen::VectorXd::Zero(gains.num_devices()));

    std::vector<int> order(gains.num_devices());
    std::iota(order.begin(), order.end(), 0);

    SolveResult result;
    while (state.sweep_count < opts.max_sweeps) {
        if (opts.order == SweepOrder::Random) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        double max_step = 0.0;
        for (int i : order) {
            max_step = std::max(max_step, std::abs(coordinate_update(i, state)));
        }
        ++state.sweep_count;
        if (state.sweep_count % opts.refresh_period == 0) {
            state.refresh_inverses();
        }
        result.max_step_trace.push_back(max_step);
        result.objective_trace.push_back(state.objective());
        if (max_step < opts.tol) {
            result.converged = true;
            break;
        }
    }
    result.sweeps = state.sweep_count;
    result.estimate = ActivityPattern::from_vector(state.activity(), gains.num_cells());
    return result;
}

ActivityPattern threshold(const ActivityPattern& estimate, double theta) {
    Eigen::VectorXd decided = (estimate.a.array() >= theta).cast<double>();
    return ActivityPattern::from_vector(std::move(decided), estimate.num_cells);
}

} // namespace mcad
