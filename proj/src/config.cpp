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

#include "mcad/config.hpp"

#include "mcad/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mcad {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

int to_int(const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw ParameterError("config: expected an integer, got '" + s + "'");
    }
    if (used != s.size()) {
        throw ParameterError("config: expected an integer, got '" + s + "'");
    }
    return v;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParameterError("config: expected a number, got '" + s + "'");
    }
    if (used != s.size()) {
        throw ParameterError("config: expected a number, got '" + s + "'");
    }
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw ParameterError("config: expected a boolean, got '" + s + "'");
}

std::string fmt_double(double v) {
    return fmt::format("{:.17g}", v);
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& format_one) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        out += format_one(values[i]);
    }
    return out;
}

template <class F>
void read_key(const pt::ptree& tree, const char* path, F&& apply) {
    if (const auto value = tree.get_optional<std::string>(path)) {
        apply(trim(*value));
    }
}

} // namespace

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::PhaseDiagram:
        return "phase-diagram";
    case ExperimentKind::Roc:
        return "roc";
    case ExperimentKind::Lemma3:
        return "lemma3";
    case ExperimentKind::Detect:
        return "detect";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
    for (auto kind : {ExperimentKind::PhaseDiagram, ExperimentKind::Roc, ExperimentKind::Lemma3,
                      ExperimentKind::Detect}) {
        if (text == to_string(kind)) {
            return kind;
        }
    }
    throw ParameterError("config: unknown experiment kind '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) {
        return {};
    }
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() < 2 || parts.size() > 3) {
            throw ParameterError("config: malformed range '" + t + "'");
        }
        const int lo = to_int(parts[0]);
        const int hi = to_int(parts[1]);
        const int step = parts.size() == 3 ? to_int(parts[2]) : 1;
        if (step < 1 || hi < lo) {
            throw ParameterError("config: malformed range '" + t + "'");
        }
        std::vector<int> out;
        for (int v = lo; v <= hi; v += step) {
            out.push_back(v);
        }
        return out;
    }
    std::vector<int> out;
    for (const auto& p : split(t, ',')) {
        out.push_back(to_int(p));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) {
        return {};
    }
    std::vector<double> out;
    for (const auto& p : split(t, ',')) {
        out.push_back(to_double(p));
    }
    return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
        throw ParameterError("logspace: need n >= 1 and 0 < lo <= hi");
    }
    std::vector<double> out(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int k = 0; k < n; ++k) {
        out[k] = n == 1 ? lo : std::pow(10.0, a + (b - a) * k / (n - 1));
    }
    return out;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* message) {
        if (!ok) {
            throw ParameterError(std::string("config: ") + message);
        }
    };
    require(trials >= 1, "trials must be >= 1");
    require(theory_samples >= 1, "theory_samples must be >= 1");
    require(ambiguous_fraction >= 0.0 && ambiguous_fraction <= 1.0, "ambiguous_fraction must lie in [0, 1]");
    require(!cells.empty(), "cells must be non-empty");
    for (int b : cells) {
        require(b >= 1, "every cell count must be >= 1");
    }
    require(radius_m > 0.0 && std::isfinite(radius_m), "radius_m must be positive");
    require(devices_per_cell >= 1, "devices_per_cell must be >= 1");
    require(pathloss.d_min_m < 0.5 * std::sqrt(3.0) * radius_m, "d_min_m must be smaller than the cell apothem");
    pathloss.validate();
    require(!lengths.empty(), "lengths must be non-empty");
    for (int l : lengths) {
        require(l >= 1, "every sequence length must be >= 1");
    }
    require(!active.empty(), "active must be non-empty");
    for (int k : active) {
        require(k >= 0 && k <= devices_per_cell, "every active count must lie in [0, devices_per_cell]");
    }
    require(!antennas.empty(), "antennas must be non-empty");
    for (int m : antennas) {
        require(m >= 1, "every antenna count must be >= 1");
    }
    if (kind == ExperimentKind::Roc) {
        require(!thresholds.empty(), "thresholds must be non-empty for roc");
    }
    require(threshold >= 0.0 && threshold <= 1.0, "detect threshold must lie in [0, 1]");
    solver.validate();
}

ExperimentConfig default_config(ExperimentKind kind, bool full) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::PhaseDiagram:
        c.cells = {1, 3, 7};
        c.devices_per_cell = full ? 200 : 50;
        c.lengths = full ? std::vector<int>{4, 6, 8, 10, 12, 14} : std::vector<int>{3, 4, 5, 6, 7};
        c.active = full ? parse_int_list("0:200:2") : parse_int_list("0:50:2");
        c.trials = full ? 100 : 20;
        break;
    case ExperimentKind::Roc:
        c.cells = {full ? 7 : 3};
        c.devices_per_cell = full ? 200 : 50;
        c.active = {full ? 20 : 8};
        c.lengths = {full ? 20 : 16};
        c.antennas = {64, 128};
        c.trials = full ? 200 : 500;
        c.theory_samples = 2000;
        c.thresholds = logspace(1e-3, 1.0, 61);
        break;
    case ExperimentKind::Lemma3:
        c.cells = full ? std::vector<int>{1, 7, 19, 37, 61, 91} : std::vector<int>{1, 7, 19, 37};
        c.devices_per_cell = 200;
        c.trials = 1;
        break;
    case ExperimentKind::Detect:
        c.cells = {3};
        c.devices_per_cell = full ? 200 : 50;
        c.active = {full ? 20 : 8};
        c.lengths = {full ? 20 : 16};
        c.antennas = {128};
        c.trials = 1;
        break;
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text, const ExperimentConfig& base) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }

    ExperimentConfig c = base;
    read_key(tree, "experiment.kind", [&](const std::string& v) { c.kind = parse_experiment_kind(v); });
    read_key(tree, "experiment.trials", [&](const std::string& v) { c.trials = to_int(v); });
    read_key(tree, "experiment.theory_samples", [&](const std::string& v) { c.theory_samples = to_int(v); });
    read_key(tree, "experiment.seed", [&](const std::string& v) {
        try {
            std::size_t used = 0;
            if (v.empty() || v.front() < '0' || v.front() > '9') {
                throw ParameterError("");
            }
            c.seed = std::stoull(v, &used);
            if (used != v.size()) {
                throw ParameterError("");
            }
        } catch (const std::exception&) {
            throw ParameterError("config: seed must be an unsigned 64-bit integer");
        }
    });
    read_key(tree, "experiment.resample_geometry", [&](const std::string& v) { c.resample_geometry = to_bool(v); });
    read_key(tree, "experiment.ambiguous_fraction", [&](const std::string& v) { c.ambiguous_fraction = to_double(v); });

    read_key(tree, "geometry.cells", [&](const std::string& v) { c.cells = parse_int_list(v); });
    read_key(tree, "geometry.radius_m", [&](const std::string& v) { c.radius_m = to_double(v); });
    read_key(tree, "geometry.devices_per_cell", [&](const std::string& v) { c.devices_per_cell = to_int(v); });
    read_key(tree, "geometry.d_min_m", [&](const std::string& v) { c.pathloss.d_min_m = to_double(v); });

    read_key(tree, "pathloss.pl_db_at_1km", [&](const std::string& v) { c.pathloss.pl_db_at_1km = to_double(v); });
    read_key(tree, "pathloss.slope_db_per_decade",
             [&](const std::string& v) { c.pathloss.slope_db_per_decade = to_double(v); });
    read_key(tree, "pathloss.tx_power_dbm", [&](const std::string& v) { c.pathloss.tx_power_dbm = to_double(v); });
    read_key(tree, "pathloss.noise_psd_dbm_hz",
             [&](const std::string& v) { c.pathloss.noise_psd_dbm_hz = to_double(v); });
    read_key(tree, "pathloss.bandwidth_hz", [&](const std::string& v) { c.pathloss.bandwidth_hz = to_double(v); });

    read_key(tree, "sweep.lengths", [&](const std::string& v) { c.lengths = parse_int_list(v); });
    read_key(tree, "sweep.active", [&](const std::string& v) { c.active = parse_int_list(v); });
    read_key(tree, "sweep.antennas", [&](const std::string& v) { c.antennas = parse_int_list(v); });
    read_key(tree, "sweep.thresholds", [&](const std::string& v) { c.thresholds = parse_double_list(v); });

    read_key(tree, "detect.asymptotic", [&](const std::string& v) { c.asymptotic = to_bool(v); });
    read_key(tree, "detect.threshold", [&](const std::string& v) { c.threshold = to_double(v); });

    read_key(tree, "solver.max_sweeps", [&](const std::string& v) { c.solver.max_sweeps = to_int(v); });
    read_key(tree, "solver.tol", [&](const std::string& v) { c.solver.tol = to_double(v); });
    read_key(tree, "solver.refresh_period", [&](const std::string& v) { c.solver.refresh_period = to_int(v); });
    read_key(tree, "solver.order", [&](const std::string& v) {
        if (v == "random") {
            c.solver.order = SweepOrder::Random;
        } else if (v == "cyclic") {
            c.solver.order = SweepOrder::Cyclic;
        } else {
            throw ParameterError("config: solver.order must be random or cyclic");
        }
    });
    return c;
}

ExperimentConfig parse_config(const std::string& text) {
    return parse_config(text, ExperimentConfig{});
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
    std::ifstream in(path);
    if (!in) {
        throw ParameterError("config: cannot open '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), base);
}

std::string to_ini(const ExperimentConfig& c) {
    auto ints = [](const std::vector<int>& v) { return join(v, [](int x) { return std::to_string(x); }); };
    auto doubles = [](const std::vector<double>& v) { return join(v, fmt_double); };

    std::string out;
    out += "[experiment]\n";
    out += fmt::format("kind = {}\n", to_string(c.kind));
    out += fmt::format("trials = {}\n", c.trials);
    out += fmt::format("theory_samples = {}\n", c.theory_samples);
    out += fmt::format("seed = {}\n", c.seed);
    out += fmt::format("resample_geometry = {}\n", c.resample_geometry ? "true" : "false");
    out += fmt::format("ambiguous_fraction = {}\n", fmt_double(c.ambiguous_fraction));
    out += "\n[geometry]\n";
    out += fmt::format("cells = {}\n", ints(c.cells));
    out += fmt::format("radius_m = {}\n", fmt_double(c.radius_m));
    out += fmt::format("devices_per_cell = {}\n", c.devices_per_cell);
    out += fmt::format("d_min_m = {}\n", fmt_double(c.pathloss.d_min_m));
    out += "\n[pathloss]\n";
    out += fmt::format("pl_db_at_1km = {}\n", fmt_double(c.pathloss.pl_db_at_1km));
    out += fmt::format("slope_db_per_decade = {}\n", fmt_double(c.pathloss.slope_db_per_decade));
    out += fmt::format("tx_power_dbm = {}\n", fmt_double(c.pathloss.tx_power_dbm));
    out += fmt::format("noise_psd_dbm_hz = {}\n", fmt_double(c.pathloss.noise_psd_dbm_hz));
    out += fmt::format("bandwidth_hz = {}\n", fmt_double(c.pathloss.bandwidth_hz));
    out += "\n[sweep]\n";
    out += fmt::format("lengths = {}\n", ints(c.lengths));
    out += fmt::format("active = {}\n", ints(c.active));
    out += fmt::format("antennas = {}\n", ints(c.antennas));
    out += fmt::format("thresholds = {}\n", doubles(c.thresholds));
    out += "\n[detect]\n";
    out += fmt::format("asymptotic = {}\n", c.asymptotic ? "true" : "false");
    out += fmt::format("threshold = {}\n", fmt_double(c.threshold));
    out += "\n[solver]\n";
    out += fmt::format("max_sweeps = {}\n", c.solver.max_sweeps);
    out += fmt::format("tol = {}\n", fmt_double(c.solver.tol));
    out += fmt::format("refresh_period = {}\n", c.solver.refresh_period);
    out += fmt::format("order = {}\n", c.solver.order == SweepOrder::Random ? "random" : "cyclic");
    return out;
}

} // namespace mcad
