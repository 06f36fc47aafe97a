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

#ifndef MCAD_CONFIG_HPP
#define MCAD_CONFIG_HPP

#include "mcad/geometry.hpp"
#include "mcad/mle_solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcad {

enum class ExperimentKind { PhaseDiagram, Roc, Lemma3, Detect };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Everything an experiment run depends on. Serialized as INI text with the
/// sections [experiment], [geometry], [pathloss], [sweep], [detect] and
/// [solver]; see README for the key list. Single-instance experiments (roc,
/// detect) use the first entry of the cells/lengths/active lists.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Detect;

    // [experiment]
    int trials = 50;
    int theory_samples = 2000;
    std::uint64_t seed = 1;
    bool resample_geometry = true;
    double ambiguous_fraction = 0.05;

    // [geometry]
    std::vector<int> cells{1};
    double radius_m = 500.0;
    int devices_per_cell = 50;

    // [pathloss] (d_min_m is read from [geometry])
    PathLossModel pathloss{};

    // [sweep]
    std::vector<int> lengths{16};
    std::vector<int> active{8};
    std::vector<int> antennas{128};
    std::vector<double> thresholds;

    // [detect]
    bool asymptotic = false;
    double threshold = 0.5;

    // [solver]
    SolverOptions solver{};

    bool operator==(const ExperimentConfig&) const = default;

    /// Throws ParameterError describing the first violated constraint.
    void validate() const;
};

/// Desk-scale defaults for an experiment kind; `full` selects the large-scale
/// parameter set.
ExperimentConfig default_config(ExperimentKind kind, bool full = false);

/// `base` overridden by every key present in the INI text.
ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);

std::string to_ini(const ExperimentConfig& config);

/// "0:50" (inclusive), "0:50:5" (with step) or "1,3,7".
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

/// n points log-spaced in [lo, hi].
std::vector<double> logspace(double lo, double hi, int n);

} // namespace mcad

#endif
