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

#include "mcad/error_analysis.hpp"

#include "mcad/errors.hpp"
#include "mcad/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcad {

int FisherModel::rank() const {
    return static_cast<int>((eigenvalues.array() > pinv_tol).count());
}

Eigen::MatrixXd FisherModel::pseudo_inverse() const {
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(eigenvalues.size());
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        if (eigenvalues(k) > pinv_tol) {
            inv(k) = 1.0 / eigenvalues(k);
        }
    }
    return eigenvectors * inv.asDiagonal() * eigenvectors.transpose();
}

FisherModel make_fisher_model(Eigen::MatrixXd J, int antennas, double rel_cutoff) {
    if (antennas < 1) {
        throw ParameterError("fisher model: antennas must be >= 1");
    }
    if (J.rows() != J.cols()) {
        throw ParameterError("fisher model: J must be square");
    }
    FisherModel model;
    model.J = 0.5 * (J + J.transpose());
    model.antennas = antennas;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.J);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("fisher model: eigendecomposition failed");
    }
    model.eigenvalues = eig.eigenvalues();
    model.eigenvectors = eig.eigenvectors();
    const double top = model.eigenvalues.size() > 0 ? model.eigenvalues.maxCoeff() : 0.0;
    model.pinv_tol = rel_cutoff * std::max(top, 0.0);
    return model;
}

FisherModel fisher_info(const ActivityPattern& truth, const SignatureSet& sigs, const GainTensor& gains, int antennas,
                        double rel_cutoff) {
    if (truth.size() != gains.num_devices() || sigs.count() != gains.num_devices()) {
        throw ParameterError("fisher_info: dimension mismatch");
    }
    const Eigen::Index n = gains.num_devices();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int b = 0; b < gains.num_cells(); ++b) {
        Eigen::LLT<Eigen::MatrixXcd> llt(model_covariance_at(sigs, gains, truth.a, b));
        if (llt.info() != Eigen::Success) {
            throw SingularCovarianceError("fisher_info: covariance not positive definite");
        }
        const Eigen::MatrixXcd P = sigs.S.adjoint() * llt.solve(sigs.S);  // S^H Sigma^{-1} S
        const Eigen::VectorXd g = gains.gains.row(b).transpose();
        J.noalias() += (g * g.transpose()).cwiseProduct(P.cwiseAbs2());
    }
    return make_fisher_model(static_cast<double>(antennas) * J, antennas, rel_cutoff);
}

Eigen::VectorXd pinv_sample(const FisherModel& model, Rng& rng) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.dim());
    const double M = static_cast<double>(model.antennas);
    for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
        const double lambda = model.eigenvalues(k);
        if (lambda > model.pinv_tol) {
            x += std::sqrt(M / lambda) * standard_normal(rng) * model.eigenvectors.col(k);
        }
    }
    return x;
}

double qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& signs) {
    const Eigen::VectorXd grad = 2.0 * H * (mu - x);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (signs(i) * mu(i) < 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        const double r = mu(i) != 0.0 ? std::abs(grad(i)) : std::abs(std::min(0.0, signs(i) * grad(i)));
        worst = std::max(worst, r);
    }
    return worst;
}

ErrorSample sign_constrained_qp(const Eigen::VectorXd& x, const FisherModel& model, const Eigen::VectorXd& signs,
                                const QpOptions& opts) {
    const Eigen::Index n = model.dim();
    if (x.size() != n || signs.size() != n) {
        throw ParameterError("sign_constrained_qp: dimension mismatch");
    }
    auto project = [&](Eigen::Index i, double v) { return signs(i) > 0.0 ? std::max(v, 0.0) : std::min(v, 0.0); };

    // Unit-diagonal rescaling mu = D^{-1} nu, D = sqrt(diag J). The sign cone
    // is invariant under positive scaling.
    const double diag_max = model.J.diagonal().maxCoeff();
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
    std::vector<bool> flat(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double jii = model.J(i, i);
        if (jii > 1e-14 * diag_max && jii > 0.0) {
            scale(i) = std::sqrt(jii);
        } else {
            flat[i] = true;
        }
    }
    Eigen::MatrixXd H = scale.cwiseInverse().asDiagonal() * model.J * scale.cwiseInverse().asDiagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (flat[i]) {
            H.row(i).setZero();
            H.col(i).setZero();
        }
    }
    const Eigen::VectorXd y = scale.cwiseProduct(x);

    Eigen::VectorXd nu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        nu(i) = project(i, y(i));
    }
    Eigen::VectorXd r = H * (nu - y);

    ErrorSample out;
    out.x = x;
    while (out.sweeps < opts.max_sweeps) {
        ++out.sweeps;
        double max_change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (flat[i]) {
                continue;
            }
            const double updated = project(i, nu(i) - r(i) / H(i, i));
            const double delta = updated - nu(i);
            if (delta != 0.0) {
                r.noalias() += delta * H.col(i);
                nu(i) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < opts.step_tol) {
            out.converged = true;
            break;
        }
        if (out.sweeps % 50 == 0) {
            r.noalias() = H * (nu - y);
        }
    }

    out.mu_hat = nu.cwiseQuotient(scale);
    out.kkt_residual = qp_kkt_residual(H, y, nu, signs);
    const Eigen::VectorXd e = x - out.mu_hat;
    out.objective = e.dot(model.J * e) / static_cast<double>(model.antennas);
    return out;
}

const char* to_string(RocSource source) {
    return source == RocSource::Empirical ? "empirical" : "theory";
}

DetectionCounts count_errors(const Eigen::VectorXd& estimate, const ActivityPattern& truth, double theta) {
    DetectionCounts c;
    for (Eigen::Index i = 0; i < estimate.size(); ++i) {
        const bool declared = estimate(i) >= theta;
        if (truth.a(i) >= 0.5) {
            ++c.active;
            c.missed += declared ? 0 : 1;
        } else {
            ++c.inactive;
            c.false_alarms += declared ? 1 : 0;
        }
    }
    return c;
}

namespace {

RocCurve aggregate(RocSource source, int antennas, std::span<const double> thresholds,
                   const std::vector<const Eigen::VectorXd*>& estimates, const ActivityPattern& truth) {
    RocCurve curve;
    curve.source = source;
    curve.antennas = antennas;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double theta : thresholds) {
        DetectionCounts total;
        for (const auto* est : estimates) {
            const auto c = count_errors(*est, truth, theta);
            total.missed += c.missed;
            total.false_alarms += c.false_alarms;
            total.active += c.active;
            total.inactive += c.inactive;
        }
        curve.pm.push_back(total.active > 0 ? static_cast<double>(total.missed) / total.active : 0.0);
        curve.pf.push_back(total.inactive > 0 ? static_cast<double>(total.false_alarms) / total.inactive : 0.0);
    }
    curve.trials = static_cast<int>(estimates.size());
    return curve;
}

} // namespace

std::vector<ErrorSample> theory_samples(const ActivityPattern& truth, const FisherModel& model, int num_samples,
                                        std::uint64_t seed, unsigned threads) {
    if (num_samples < 1) {
        throw ParameterError("theory_samples: num_samples must be >= 1");
    }
    if (truth.size() != model.dim()) {
        throw ParameterError("theory_samples: dimension mismatch");
    }
    const Eigen::VectorXd signs = truth.cone_signs();
    std::vector<ErrorSample> samples(num_samples);
    parallel_for(samples.size(), threads, [&](std::size_t k) {
        Rng rng = make_stream(seed, {k});
        samples[k] = sign_constrained_qp(pinv_sample(model, rng), model, signs);
    });
    return samples;
}

RocCurve predict_roc(const ActivityPattern& truth, const FisherModel& model, std::span<const double> thresholds,
                     int num_samples, std::uint64_t seed, unsigned threads) {
    const auto samples = theory_samples(truth, model, num_samples, seed, threads);
    const double root_m = std::sqrt(static_cast<double>(model.antennas));

    std::vector<Eigen::VectorXd> estimates;
    estimates.reserve(samples.size());
    int rejected = 0;
    for (const auto& s : samples) {
        if (!s.converged) {
            ++rejected;
            continue;
        }
        estimates.push_back(truth.a + s.mu_hat / root_m);
    }
    std::vector<const Eigen::VectorXd*> views;
    for (const auto& e : estimates) {
        views.push_back(&e);
    }
    RocCurve curve = aggregate(RocSource::Theory, model.antennas, thresholds, views, truth);
    curve.nonconverged = rejected;
    return curve;
}

std::vector<SolveResult> empirical_estimates(const ActivityPattern& truth, const SignatureSet& sigs,
                                             const GainTensor& gains, int antennas, int num_trials,
                                             const SolverOptions& opts, std::uint64_t seed, unsigned threads) {
    if (num_trials < 1) {
        throw ParameterError("empirical_roc: num_trials must be >= 1");
    }
    std::vector<SolveResult> results(num_trials);
    parallel_for(results.size(), threads, [&](std::size_t k) {
        Rng rng = make_stream(seed, {k});
        const auto signals = simulate_received(sigs, gains, truth, antennas, rng);
        results[k] = solve(sample_covariance(signals), sigs, gains, opts, rng);
    });
    return results;
}

RocCurve empirical_roc(const ActivityPattern& truth, const SignatureSet& sigs, const GainTensor& gains, int antennas,
                       std::span<const double> thresholds, int num_trials, const SolverOptions& opts,
                       std::uint64_t seed, unsigned threads) {
    const auto results = empirical_estimates(truth, sigs, gains, antennas, num_trials, opts, seed, threads);
    std::vector<const Eigen::VectorXd*> views;
    int nonconverged = 0;
    for (const auto& r : results) {
        views.push_back(&r.estimate.a);
        nonconverged += r.converged ? 0 : 1;
    }
    RocCurve curve = aggregate(RocSource::Empirical, antennas, thresholds, views, truth);
    curve.nonconverged = nonconverged;
    return curve;
}

} // namespace mcad
