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

#include "mcad/experiments.hpp"

#include "mcad/consistency.hpp"
#include "mcad/errors.hpp"
#include "mcad/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace mcad {

namespace {

std::string g17(double v) {
    return fmt::format("{:.17g}", v);
}

enum class Outcome : signed char { Holds, Fails, Ambiguous };

} // namespace

Instance make_instance(const ExperimentConfig& config, int cells, int length, std::uint64_t geometry_seed,
                       std::uint64_t signature_seed) {
    Instance inst;
    inst.layout = build_hex_layout(cells, config.radius_m);
    Rng geometry_rng(geometry_seed);
    inst.placement = place_devices(inst.layout, config.devices_per_cell, geometry_rng, config.pathloss.d_min_m);
    inst.gains = compute_gains(inst.layout, inst.placement, config.pathloss);
    Rng signature_rng(signature_seed);
    inst.sigs = sample_sphere_sequences(length, cells * config.devices_per_cell, signature_rng);
    return inst;
}

std::vector<TransitionEstimate> estimate_transitions(const std::vector<PhaseDiagramRow>& rows) {
    std::map<std::pair<int, int>, std::vector<const PhaseDiagramRow*>> groups;
    for (const auto& r : rows) {
        groups[{r.cells, r.length}].push_back(&r);
    }
    std::vector<TransitionEstimate> out;
    for (auto& [key, group] : groups) {
        std::sort(group.begin(), group.end(),
                  [](const PhaseDiagramRow* a, const PhaseDiagramRow* b) { return a->active < b->active; });
        TransitionEstimate t;
        t.cells = key.first;
        t.length = key.second;
        for (const auto* r : group) {
            if (2 * r->holds_count < r->trials) {
                break;
            }
            t.k_star = r->active;
        }
        for (const auto* r : group) {
            if (r->holds_count != r->trials) {
                break;
            }
            t.k_low = r->active;
        }
        for (const auto* r : group) {
            if (r->holds_count == 0) {
                t.k_high = r->active;
                break;
            }
        }
        out.push_back(t);
    }
    return out;
}

PhaseDiagramResult run_phase_diagram(const ExperimentConfig& config, unsigned threads) {
    config.validate();
    struct Task {
        int cells;
        int length;
        int trial;
    };
    std::vector<Task> tasks;
    for (int B : config.cells) {
        for (int L : config.lengths) {
            for (int t = 0; t < config.trials; ++t) {
                tasks.push_back({B, L, t});
            }
        }
    }

    const std::size_t nk = config.active.size();
    std::vector<std::vector<Outcome>> outcomes(tasks.size(), std::vector<Outcome>(nk, Outcome::Ambiguous));
    parallel_for(tasks.size(), threads, [&](std::size_t idx) {
        const Task& task = tasks[idx];
        const auto B = static_cast<std::uint64_t>(task.cells);
        const auto L = static_cast<std::uint64_t>(task.length);
        const auto t = static_cast<std::uint64_t>(task.trial);
        const std::uint64_t geometry_seed =
            derive_seed(config.seed, {kGeometryStream, B, config.resample_geometry ? t : 0});
        const std::uint64_t signature_seed = derive_seed(config.seed, {kSignatureStream, B, L, t});
        const Instance inst = make_instance(config, task.cells, task.length, geometry_seed, signature_seed);
        const NullspaceBasis basis = common_nullspace(build_lift(inst.sigs), inst.gains);

        for (std::size_t k = 0; k < nk; ++k) {
            const int K = config.active[k];
            Rng rng = make_stream(config.seed, {kActivityStream, B, L, static_cast<std::uint64_t>(K), t});
            const ActivityPattern truth = sample_activity(task.cells, config.devices_per_cell, K, rng);
            const ConsistencyVerdict verdict = cone_feasibility(basis, truth.cone_signs());
            if (!verdict.holds.has_value()) {
                outcomes[idx][k] = Outcome::Ambiguous;
            } else {
                outcomes[idx][k] = *verdict.holds ? Outcome::Holds : Outcome::Fails;
            }
        }
    });

    PhaseDiagramResult result;
    std::size_t idx = 0;
    for (int B : config.cells) {
        for (int L : config.lengths) {
            std::vector<PhaseDiagramRow> rows(nk);
            for (std::size_t k = 0; k < nk; ++k) {
                rows[k] = {B, config.devices_per_cell, L, config.active[k], config.trials, 0, 0, 0};
            }
            for (int t = 0; t < config.trials; ++t, ++idx) {
                for (std::size_t k = 0; k < nk; ++k) {
                    switch (outcomes[idx][k]) {
                    case Outcome::Holds:
                        ++rows[k].holds_count;
                        break;
                    case Outcome::Fails:
                        ++rows[k].fails_count;
                        break;
                    case Outcome::Ambiguous:
                        ++rows[k].ambiguous_count;
                        ++result.ambiguous_total;
                        break;
                    }
                    ++result.checks_total;
                }
            }
            result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        }
    }
    result.transitions = estimate_transitions(result.rows);
    return result;
}

RocResult run_roc(const ExperimentConfig& config, unsigned threads) {
    config.validate();
    const int B = config.cells.front();
    const int L = config.lengths.front();
    const int K = config.active.front();
    const Instance inst = make_instance(config, B, L, derive_seed(config.seed, {kGeometryStream}),
                                        derive_seed(config.seed, {kSignatureStream}));
    Rng activity_rng = make_stream(config.seed, {kActivityStream});

    RocResult result;
    result.truth = sample_activity(B, config.devices_per_cell, K, activity_rng);
    for (int M : config.antennas) {
        const auto m = static_cast<std::uint64_t>(M);
        result.curves.push_back(empirical_roc(result.truth, inst.sigs, inst.gains, M, config.thresholds,
                                              config.trials, config.solver,
                                              derive_seed(config.seed, {kChannelStream, m}), threads));
        const FisherModel model = fisher_info(result.truth, inst.sigs, inst.gains, M);
        result.curves.push_back(predict_roc(result.truth, model, config.thresholds, config.theory_samples,
                                            derive_seed(config.seed, {kTheoryStream, m}), threads));
    }
    return result;
}

std::vector<Lemma3Row> run_lemma3(const ExperimentConfig& config) {
    config.validate();
    const int largest = *std::max_element(config.cells.begin(), config.cells.end());
    const CellLayout full_layout = build_hex_layout(largest, config.radius_m);
    Rng rng = make_stream(config.seed, {kGeometryStream});
    const DevicePlacement full_placement =
        place_devices(full_layout, config.devices_per_cell, rng, config.pathloss.d_min_m);

    // Spiral layouts are nested, so smaller B reuse the first B cells of the
    // largest placement.
    std::vector<Lemma3Row> rows;
    for (int B : config.cells) {
        const CellLayout layout = build_hex_layout(B, config.radius_m);
        DevicePlacement placement;
        placement.devices_per_cell = config.devices_per_cell;
        const auto count = static_cast<std::size_t>(B) * config.devices_per_cell;
        placement.positions.assign(full_placement.positions.begin(), full_placement.positions.begin() + count);
        placement.home_cell.assign(full_placement.home_cell.begin(), full_placement.home_cell.begin() + count);
        const GainTensor gains = compute_gains(layout, placement, config.pathloss);

        const auto rings = lemma3_ring_contributions(layout, gains, 0);
        double cumulative = 0.0;
        for (std::size_t r = 0; r < rings.size(); ++r) {
            cumulative += rings[r];
            rows.push_back({B, 0, static_cast<int>(r), rings[r], cumulative});
        }
    }
    return rows;
}

DetectResult run_detect(const ExperimentConfig& config) {
    config.validate();
    const int B = config.cells.front();
    const int L = config.lengths.front();
    const int K = config.active.front();
    const Instance inst = make_instance(config, B, L, derive_seed(config.seed, {kGeometryStream}),
                                        derive_seed(config.seed, {kSignatureStream}));
    Rng activity_rng = make_stream(config.seed, {kActivityStream});

    DetectResult result;
    result.truth = sample_activity(B, config.devices_per_cell, K, activity_rng);
    CovarianceSet covs;
    if (config.asymptotic) {
        covs = model_covariance(inst.sigs, inst.gains, result.truth.a);
    } else {
        Rng channel_rng = make_stream(config.seed, {kChannelStream});
        covs = sample_covariance(
            simulate_received(inst.sigs, inst.gains, result.truth, config.antennas.front(), channel_rng));
    }
    Rng solver_rng = make_stream(config.seed, {kSolverStream});
    result.solve = solve(covs, inst.sigs, inst.gains, config.solver, solver_rng);
    result.decided = threshold(result.solve.estimate, config.threshold);
    result.counts = count_errors(result.solve.estimate.a, result.truth, config.threshold);
    result.pm = result.counts.active > 0 ? static_cast<double>(result.counts.missed) / result.counts.active : 0.0;
    result.pf =
        result.counts.inactive > 0 ? static_cast<double>(result.counts.false_alarms) / result.counts.inactive : 0.0;
    return result;
}

std::string phase_diagram_csv(const PhaseDiagramResult& result) {
    std::string out = "B,N,L,K,trials,holds_count,fails_count,ambiguous_count,l2_over_n,k_over_n\n";
    for (const auto& r : result.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.cells, r.devices_per_cell, r.length, r.active,
                           r.trials, r.holds_count, r.fails_count, r.ambiguous_count, g17(r.l2_over_n()),
                           g17(r.k_over_n()));
    }
    return out;
}

std::string transitions_csv(const PhaseDiagramResult& result, int devices_per_cell) {
    std::string out = "B,N,L,k_star,k_low,k_high,l2_over_n,kstar_over_n\n";
    for (const auto& t : result.transitions) {
        const double n = devices_per_cell;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", t.cells, devices_per_cell, t.length, t.k_star, t.k_low,
                           t.k_high, g17(t.length * t.length / n), g17(t.k_star / n));
    }
    return out;
}

std::string roc_csv(const RocResult& result) {
    std::string out = "source,M,threshold,pm,pf,trials,nonconverged\n";
    for (const auto& c : result.curves) {
        for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
            out += fmt::format("{},{},{},{},{},{},{}\n", to_string(c.source), c.antennas, g17(c.thresholds[k]),
                               g17(c.pm[k]), g17(c.pf[k]), c.trials, c.nonconverged);
        }
    }
    return out;
}

std::string lemma3_csv(const std::vector<Lemma3Row>& rows) {
    std::string out = "B,cell,ring,contribution,cumulative_sum\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.cells, r.cell, r.ring, g17(r.contribution), g17(r.cumulative_sum));
    }
    return out;
}

std::string detect_summary_csv(const DetectResult& result) {
    std::string out = "device,cell,truth,score,detected\n";
    const auto& a = result.solve.estimate.a;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out += fmt::format("{},{},{},{},{}\n", i, i / result.truth.devices_per_cell,
                           static_cast<int>(result.truth.a(i)), g17(a(i)), static_cast<int>(result.decided.a(i)));
    }
    return out;
}

std::string detect_trace_csv(const DetectResult& result) {
    std::string out = "sweep,objective,max_step\n";
    for (std::size_t k = 0; k < result.solve.objective_trace.size(); ++k) {
        out += fmt::format("{},{},{}\n", k + 1, g17(result.solve.objective_trace[k]),
                           g17(result.solve.max_step_trace[k]));
    }
    return out;
}

std::string detect_report(const DetectResult& result, const ExperimentConfig& config) {
    std::string out;
    out += fmt::format("detect: B={} N={} K={} L={} {}\n", result.truth.num_cells, result.truth.devices_per_cell,
                       config.active.front(), config.lengths.front(),
                       config.asymptotic ? std::string("M=inf (model covariance)")
                                         : fmt::format("M={}", config.antennas.front()));
    out += fmt::format("solver: {} sweeps, {}, final objective {}\n", result.solve.sweeps,
                       result.solve.converged ? "converged" : "NOT converged",
                       result.solve.objective_trace.empty() ? std::string("n/a")
                                                            : g17(result.solve.objective_trace.back()));
    for (int b = 0; b < result.truth.num_cells; ++b) {
        std::string truth_list;
        for (int i : result.truth.per_cell_support[b]) {
            truth_list += fmt::format(" {}", i);
        }
        std::string detected_list;
        for (int i : result.decided.per_cell_support[b]) {
            detected_list += fmt::format(" {}", i);
        }
        out += fmt::format("cell {}: {} active [{} ]\n        {} detected [{} ]\n", b,
                           result.truth.per_cell_support[b].size(), truth_list,
                           result.decided.per_cell_support[b].size(), detected_list);
    }
    out += fmt::format("threshold {}: missed {}/{} (PM={}), false alarms {}/{} (PF={})\n", config.threshold,
                       result.counts.missed, result.counts.active, g17(result.pm), result.counts.false_alarms,
                       result.counts.inactive, g17(result.pf));
    return out;
}

} // namespace mcad
