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

#ifndef MCAD_EXPERIMENTS_HPP
#define MCAD_EXPERIMENTS_HPP

#include "mcad/config.hpp"
#include "mcad/error_analysis.hpp"
#include "mcad/mle_solver.hpp"
#include "mcad/system_sim.hpp"

#include <string>
#include <vector>

namespace mcad {

enum ExitCode : int { kExitOk = 0, kExitConfigError = 2, kExitNumericalFailure = 3 };

// Stream tags for derive_seed; the key path of each random draw is
// (seed, tag, ...indices) so that results do not depend on scheduling.
enum StreamTag : std::uint64_t {
    kGeometryStream = 1,
    kSignatureStream = 2,
    kActivityStream = 3,
    kChannelStream = 4,
    kTheoryStream = 5,
    kSolverStream = 6,
};

/// One random problem instance (geometry, sequences, gains).
struct Instance {
    CellLayout layout;
    DevicePlacement placement;
    GainTensor gains;
    SignatureSet sigs;
};

Instance make_instance(const ExperimentConfig& config, int cells, int length, std::uint64_t geometry_seed,
                       std::uint64_t signature_seed);

struct PhaseDiagramRow {
    int cells = 0;
    int devices_per_cell = 0;
    int length = 0;
    int active = 0;
    int trials = 0;
    int holds_count = 0;
    int fails_count = 0;
    int ambiguous_count = 0;

    double l2_over_n() const { return static_cast<double>(length) * length / devices_per_cell; }
    double k_over_n() const { return static_cast<double>(active) / devices_per_cell; }
};

/// K* is the last K of the leading run (ascending K) with success rate >= 1/2.
/// The error bar spans from the end of the leading run where every trial holds
/// (k_low) to the smallest K where none does (k_high); -1 when no such K exists.
struct TransitionEstimate {
    int cells = 0;
    int length = 0;
    int k_star = -1;
    int k_low = -1;
    int k_high = -1;
};

struct PhaseDiagramResult {
    std::vector<PhaseDiagramRow> rows;
    std::vector<TransitionEstimate> transitions;
    long ambiguous_total = 0;
    long checks_total = 0;
};

PhaseDiagramResult run_phase_diagram(const ExperimentConfig& config, unsigned threads = 1);
std::vector<TransitionEstimate> estimate_transitions(const std::vector<PhaseDiagramRow>& rows);

struct RocResult {
    std::vector<RocCurve> curves;  // per antenna count: empirical then theory
    ActivityPattern truth;
};

RocResult run_roc(const ExperimentConfig& config, unsigned threads = 1);

struct Lemma3Row {
    int cells = 0;
    int cell = 0;
    int ring = 0;
    double contribution = 0.0;
    double cumulative_sum = 0.0;
};

std::vector<Lemma3Row> run_lemma3(const ExperimentConfig& config);

struct DetectResult {
    ActivityPattern truth;
    SolveResult solve;
    ActivityPattern decided;
    DetectionCounts counts;
    double pm = 0.0;
    double pf = 0.0;
};

DetectResult run_detect(const ExperimentConfig& config);

// CSV writers. Floating-point fields use 17 significant digits.
std::string phase_diagram_csv(const PhaseDiagramResult& result);
std::string transitions_csv(const PhaseDiagramResult& result, int devices_per_cell);
std::string roc_csv(const RocResult& result);
std::string lemma3_csv(const std::vector<Lemma3Row>& rows);
std::string detect_summary_csv(const DetectResult& result);
std::string detect_trace_csv(const DetectResult& result);
std::string detect_report(const DetectResult& result, const ExperimentConfig& config);

} // namespace mcad

#endif
