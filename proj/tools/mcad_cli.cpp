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

// Batch driver for the activity-detection experiments.
//
//   mcad phase-diagram [--config f.ini] [--seed S] [--out DIR] [--threads T] [--full]
//   mcad roc | lemma3 | detect  (same flags)

#include "mcad/config.hpp"
#include "mcad/errors.hpp"
#include "mcad/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    unsigned threads = 1;
    bool full = false;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw mcad::ParameterError("cannot write " + path.string());
    }
    out << content;
}

mcad::ExperimentConfig resolve_config(mcad::ExperimentKind kind, const CommonFlags& flags) {
    mcad::ExperimentConfig config = mcad::default_config(kind, flags.full);
    if (!flags.config_path.empty()) {
        config = mcad::load_config(flags.config_path, config);
        if (config.kind != kind) {
            throw mcad::ParameterError(fmt::format("config kind '{}' does not match subcommand '{}'",
                                                   mcad::to_string(config.kind), mcad::to_string(kind)));
        }
    }
    if (flags.seed) {
        config.seed = *flags.seed;
    }
    config.validate();
    return config;
}

int run(mcad::ExperimentKind kind, const CommonFlags& flags) {
    const mcad::ExperimentConfig config = resolve_config(kind, flags);
    const std::filesystem::path out_dir(flags.out_dir);
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / fmt::format("{}_config.ini", mcad::to_string(kind)), mcad::to_ini(config));

    switch (kind) {
    case mcad::ExperimentKind::PhaseDiagram: {
        const auto result = mcad::run_phase_diagram(config, flags.threads);
        write_file(out_dir / "phase_diagram.csv", mcad::phase_diagram_csv(result));
        write_file(out_dir / "phase_transitions.csv", mcad::transitions_csv(result, config.devices_per_cell));
        for (const auto& t : result.transitions) {
            std::cout << fmt::format("B={} L={} K*={} range=[{}, {}]\n", t.cells, t.length, t.k_star, t.k_low,
                                     t.k_high);
        }
        const double fraction =
            result.checks_total > 0 ? static_cast<double>(result.ambiguous_total) / result.checks_total : 0.0;
        if (fraction > config.ambiguous_fraction) {
            std::cerr << fmt::format("ambiguous LP fraction {:.4f} exceeds {:.4f}\n", fraction,
                                     config.ambiguous_fraction);
            return mcad::kExitNumericalFailure;
        }
        return mcad::kExitOk;
    }
    case mcad::ExperimentKind::Roc: {
        const auto result = mcad::run_roc(config, flags.threads);
        write_file(out_dir / "roc.csv", mcad::roc_csv(result));
        bool too_many_failures = false;
        for (const auto& c : result.curves) {
            const int attempted = c.source == mcad::RocSource::Theory ? c.trials + c.nonconverged : c.trials;
            const double fraction = static_cast<double>(c.nonconverged) / attempted;
            std::cout << fmt::format("{} M={}: {} trials, {} non-converged\n", mcad::to_string(c.source),
                                     c.antennas, c.trials, c.nonconverged);
            too_many_failures = too_many_failures || fraction > config.ambiguous_fraction;
        }
        return too_many_failures ? mcad::kExitNumericalFailure : mcad::kExitOk;
    }
    case mcad::ExperimentKind::Lemma3: {
        const auto rows = mcad::run_lemma3(config);
        write_file(out_dir / "lemma3.csv", mcad::lemma3_csv(rows));
        for (const auto& r : rows) {
            std::cout << fmt::format("B={} ring={} contribution={:.6g} cumulative={:.6g}\n", r.cells, r.ring,
                                     r.contribution, r.cumulative_sum);
        }
        return mcad::kExitOk;
    }
    case mcad::ExperimentKind::Detect: {
        const auto result = mcad::run_detect(config);
        write_file(out_dir / "detect_summary.csv", mcad::detect_summary_csv(result));
        write_file(out_dir / "detect_trace.csv", mcad::detect_trace_csv(result));
        std::cout << mcad::detect_report(result, config);
        return result.solve.converged ? mcad::kExitOk : mcad::kExitNumericalFailure;
    }
    }
    return mcad::kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariance-based activity detection experiments"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::uint64_t seed_value = 0;
    std::optional<mcad::ExperimentKind> chosen;

    auto add = [&](mcad::ExperimentKind kind, const char* help) {
        CLI::App* sub = app.add_subcommand(mcad::to_string(kind), help);
        sub->add_option("--config", flags.config_path, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_value, "root seed (overrides the config)");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--threads", flags.threads, "worker threads (0 = hardware concurrency)");
        sub->add_flag("--full", flags.full, "large-scale defaults");
        sub->callback([&, kind, sub] {
            chosen = kind;
            if (sub->count("--seed") > 0) {
                flags.seed = seed_value;
            }
        });
    };
    add(mcad::ExperimentKind::PhaseDiagram, "consistency phase diagram over (L, K) for several B");
    add(mcad::ExperimentKind::Roc, "empirical vs predicted PM/PF curves");
    add(mcad::ExperimentKind::Lemma3, "interference sum over hexagonal rings");
    add(mcad::ExperimentKind::Detect, "single end-to-end detection run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mcad::kExitConfigError;
    }

    try {
        return run(*chosen, flags);
    } catch (const mcad::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mcad::kExitConfigError;
    } catch (const mcad::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return mcad::kExitNumericalFailure;
    }
}
