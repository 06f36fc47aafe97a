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

#include "mcad/system_sim.hpp"

#include "mcad/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcad {

ActivityPattern ActivityPattern::from_vector(Eigen::VectorXd a, int num_cells) {
    if (num_cells < 1 || a.size() % num_cells != 0) {
        throw ParameterError("ActivityPattern: size must be a multiple of the number of cells");
    }
    ActivityPattern p;
    p.num_cells = num_cells;
    p.devices_per_cell = static_cast<int>(a.size() / num_cells);
    p.per_cell_support.assign(num_cells, {});
    for (int i = 0; i < a.size(); ++i) {
        if (!(a(i) >= 0.0 && a(i) <= 1.0)) {
            throw ParameterError("ActivityPattern: entries must lie in [0, 1]");
        }
        if (a(i) >= 0.5) {
            p.per_cell_support[i / p.devices_per_cell].push_back(i);
        } else {
            p.inactive.push_back(i);
        }
    }
    p.a = std::move(a);
    return p;
}

bool ActivityPattern::is_binary() const {
    return (a.array() == 0.0 || a.array() == 1.0).all();
}

Eigen::VectorXd ActivityPattern::cone_signs() const {
    Eigen::VectorXd signs = Eigen::VectorXd::Constant(a.size(), -1.0);
    for (int i : inactive) {
        signs(i) = 1.0;
    }
    return signs;
}

ActivityPattern sample_activity(int num_cells, int devices_per_cell, int active_per_cell, Rng& rng) {
    if (num_cells < 1 || devices_per_cell < 1) {
        throw ParameterError("sample_activity: B and N must be >= 1");
    }
    if (active_per_cell < 0 || active_per_cell > devices_per_cell) {
        throw ParameterError("sample_activity: K must lie in [0, N]");
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_cells) * devices_per_cell);
    std::vector<int> perm(devices_per_cell);
    for (int cell = 0; cell < num_cells; ++cell) {
        std::iota(perm.begin(), perm.end(), 0);
        // Partial Fisher-Yates: the first K entries are a uniform K-subset.
        for (int k = 0; k < active_per_cell; ++k) {
            std::uniform_int_distribution<int> pick(k, devices_per_cell - 1);
            std::swap(perm[k], perm[pick(rng)]);
            a(cell * devices_per_cell + perm[k]) = 1.0;
        }
    }
    return ActivityPattern::from_vector(std::move(a), num_cells);
}

std::vector<Eigen::MatrixXcd> simulate_received(const SignatureSet& sigs, const GainTensor& gains,
                                                const ActivityPattern& truth, int antennas, Rng& rng) {
    if (antennas < 1) {
        throw ParameterError("simulate_received: antennas must be >= 1");
    }
    if (sigs.count() != gains.num_devices() || truth.size() != gains.num_devices()) {
        throw ParameterError("simulate_received: dimension mismatch");
    }
    const int L = sigs.length();
    const double noise_std = std::sqrt(gains.noise_var);

    std::vector<int> active;
    for (int i = 0; i < truth.size(); ++i) {
        if (truth.a(i) != 0.0) {
            active.push_back(i);
        }
    }

    std::vector<Eigen::MatrixXcd> signals;
    signals.reserve(gains.num_cells());
    Eigen::RowVectorXcd h(antennas);
    for (int b = 0; b < gains.num_cells(); ++b) {
        Eigen::MatrixXcd Y(L, antennas);
        for (int m = 0; m < antennas; ++m) {
            for (int l = 0; l < L; ++l) {
                Y(l, m) = noise_std * complex_normal(rng);
            }
        }
        for (int i : active) {
            for (int m = 0; m < antennas; ++m) {
                h(m) = complex_normal(rng);
            }
            const double amplitude = truth.a(i) * std::sqrt(gains.gains(b, i));
            Y.noalias() += (amplitude * sigs.S.col(i)) * h;
        }
        signals.push_back(std::move(Y));
    }
    return signals;
}

CovarianceSet sample_covariance(const std::vector<Eigen::MatrixXcd>& signals) {
    CovarianceSet out;
    out.kind = CovarianceKind::Sample;
    if (signals.empty()) {
        return out;
    }
    out.antennas = static_cast<int>(signals.front().cols());
    if (out.antennas < 1) {
        throw ParameterError("sample_covariance: at least one antenna required");
    }
    for (const auto& Y : signals) {
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(Y.rows(), Y.rows());
        C.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(Y.cols()));
        out.matrices.push_back(C.selfadjointView<Eigen::Lower>());
    }
    return out;
}

Eigen::MatrixXcd model_covariance_at(const SignatureSet& sigs, const GainTensor& gains, const Eigen::VectorXd& a,
                                     int cell) {
    const Eigen::VectorXd weights = gains.gains.row(cell).transpose().cwiseProduct(a);
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(sigs.length(), sigs.length());
    for (int i = 0; i < a.size(); ++i) {
        if (weights(i) != 0.0) {
            C.selfadjointView<Eigen::Lower>().rankUpdate(sigs.S.col(i), weights(i));
        }
    }
    Eigen::MatrixXcd full = C.selfadjointView<Eigen::Lower>();
    full.diagonal().array() += gains.noise_var;
    return full;
}

CovarianceSet model_covariance(const SignatureSet& sigs, const GainTensor& gains, const Eigen::VectorXd& a) {
    if (a.size() != gains.num_devices() || sigs.count() != gains.num_devices()) {
        throw ParameterError("model_covariance: dimension mismatch");
    }
    if ((a.array() < 0.0).any() || (a.array() > 1.0).any()) {
        throw ParameterError("model_covariance: activity entries must lie in [0, 1]");
    }
    CovarianceSet out;
    out.kind = CovarianceKind::Model;
    for (int b = 0; b < gains.num_cells(); ++b) {
        out.matrices.push_back(model_covariance_at(sigs, gains, a, b));
    }
    return out;
}

} // namespace mcad
