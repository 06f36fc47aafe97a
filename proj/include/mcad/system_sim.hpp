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

#ifndef MCAD_SYSTEM_SIM_HPP
#define MCAD_SYSTEM_SIM_HPP

#include "mcad/geometry.hpp"
#include "mcad/rng.hpp"
#include "mcad/signatures.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mcad {

/// Activity vector over all B*N devices (cell-major) with support bookkeeping.
/// Ground-truth patterns are binary; estimates take values in [0, 1].
struct ActivityPattern {
    Eigen::VectorXd a;
    int num_cells = 0;
    int devices_per_cell = 0;
    std::vector<std::vector<int>> per_cell_support;  // indices with a_i >= 0.5, per cell
    std::vector<int> inactive;                       // indices with a_i < 0.5

    static ActivityPattern from_vector(Eigen::VectorXd a, int num_cells);

    int size() const { return static_cast<int>(a.size()); }
    bool is_binary() const;
    /// Cone sign per index: +1 for inactive (x_i >= 0), -1 for active (x_i <= 0).
    Eigen::VectorXd cone_signs() const;
};

ActivityPattern sample_activity(int num_cells, int devices_per_cell, int active_per_cell, Rng& rng);

enum class CovarianceKind { Model, Sample };

struct CovarianceSet {
    std::vector<Eigen::MatrixXcd> matrices;
    CovarianceKind kind = CovarianceKind::Model;
    int antennas = 0;  // sample covariances only

    int num_cells() const { return static_cast<int>(matrices.size()); }
};

/// Per-BS received pilot signals Y_b (L x M) with i.i.d. Rayleigh fading and
/// CN(0, noise_var) noise, independent across base stations.
std::vector<Eigen::MatrixXcd> simulate_received(const SignatureSet& sigs, const GainTensor& gains,
                                                const ActivityPattern& truth, int antennas, Rng& rng);

CovarianceSet sample_covariance(const std::vector<Eigen::MatrixXcd>& signals);

/// Sigma_b(a) = S G_b diag(a) S^H + noise_var I for every BS b.
CovarianceSet model_covariance(const SignatureSet& sigs, const GainTensor& gains, const Eigen::VectorXd& a);

Eigen::MatrixXcd model_covariance_at(const SignatureSet& sigs, const GainTensor& gains, const Eigen::VectorXd& a, int cell);

} // namespace mcad

#endif
