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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// only when a criterion outside kKnownUnattainable fails.

#include "mcad/config.hpp"
#include "mcad/consistency.hpp"
#include "mcad/error_analysis.hpp"
#include "mcad/experiments.hpp"
#include "mcad/mle_solver.hpp"
#include "mcad/parallel.hpp"
#include "mcad/rng.hpp"
#include "mcad/signatures.hpp"
#include "mcad/system_sim.hpp"
#include "support/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

using namespace mcad;

namespace {

const std::set<int> kKnownUnattainable = {2};

struct Outcome {
    bool pass = false;
    std::string detail;
};

GainTensor random_gains(int cells, int devices, Rng& rng, double noise = 0.3) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    GainTensor gains;
    gains.gains.resize(cells, devices);
    for (int b = 0; b < cells; ++b) {
        for (int i = 0; i < devices; ++i) {
            gains.gains(b, i) = u(rng);
        }
    }
    gains.noise_var = noise;
    return gains;
}

Eigen::MatrixXd random_spd(int n, Rng& rng, double ridge) {
    Eigen::MatrixXd A(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            A(r, c) = standard_normal(rng);
        }
    }
    return A * A.transpose() + ridge * Eigen::MatrixXd::Identity(n, n);
}

double spectral_norm(const Eigen::MatrixXd& sym) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .cwiseAbs()
        .maxCoeff();
}

// Criteria 1 and 2 share one sweep.
PhaseDiagramResult overlap_sweep(unsigned threads) {
    auto c = default_config(ExperimentKind::PhaseDiagram);
    c.cells = {1, 3, 7};
    c.devices_per_cell = 50;
    c.lengths = {8, 10, 12, 14, 16};
    c.active = parse_int_list("0:50");
    c.trials = 50;
    c.seed = 20240101;
    return run_phase_diagram(c, threads);
}

Outcome phase_overlap(const PhaseDiagramResult& pd) {
    std::map<int, std::vector<int>> by_length;
    for (const auto& t : pd.transitions) {
        by_length[t.length].push_back(t.k_star);
    }
    int spread = 0;
    std::string curves;
    for (const auto& [L, ks] : by_length) {
        const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
        spread = std::max(spread, *hi - *lo);
        curves += fmt::format(" L={}:[{}]", L, fmt::join(ks, ","));
    }
    return {spread <= 2, fmt::format("max K* spread {} devices;{}", spread, curves)};
}

Outcome quadratic_scaling(const PhaseDiagramResult& pd) {
    std::map<int, std::vector<std::pair<double, double>>> by_cells;
    bool defined = true;
    for (const auto& t : pd.transitions) {
        if (t.k_star <= 0) {
            defined = false;
            continue;
        }
        by_cells[t.cells].push_back({std::log(t.length), std::log(t.k_star)});
    }
    bool pass = defined;
    std::string slopes;
    for (const auto& [B, pts] : by_cells) {
        const double n = static_cast<double>(pts.size());
        double mx = 0.0;
        double my = 0.0;
        for (const auto& [x, y] : pts) {
            mx += x / n;
            my += y / n;
        }
        double sxy = 0.0;
        double sxx = 0.0;
        for (const auto& [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
        pass = pass && slope >= 1.6 && slope <= 2.4;
        slopes += fmt::format(" B={}:{:.3f}", B, slope);
    }
    const long ambiguous = pd.ambiguous_total;
    return {pass, fmt::format("slopes{}{}; ambiguous {}", slopes, defined ? "" : "; some K* undefined", ambiguous)};
}

Outcome asymptotic_exactness() {
    auto c = default_config(ExperimentKind::Detect);
    c.cells = {3};
    c.devices_per_cell = 50;
    int holding = 0;
    int exact = 0;
    int seed = 0;
    double worst = 0.0;
    for (; holding < 100 && seed < 1000; ++seed) {
        const auto s = static_cast<std::uint64_t>(seed);
        const Instance inst = make_instance(c, 3, 12, derive_seed(s, {kGeometryStream}), derive_seed(s, {kSignatureStream}));
        Rng rng = make_stream(s, {kActivityStream});
        const ActivityPattern truth = sample_activity(3, 50, 5, rng);
        const auto verdict = check_consistency(inst.sigs, inst.gains, truth);
        if (!verdict.holds.value_or(false)) {
            continue;
        }
        ++holding;
        Rng solver_rng = make_stream(s, {kSolverStream});
        const auto result = solve(model_covariance(inst.sigs, inst.gains, truth.a), inst.sigs, inst.gains, c.solver,
                                  solver_rng);
        const double err = (result.estimate.a - truth.a).lpNorm<Eigen::Infinity>();
        worst = std::max(worst, err);
        exact += err < 1e-3 ? 1 : 0;
    }
    return {holding == 100 && exact >= 95,
            fmt::format("{}/{} holding instances within 1e-3 (seeds tried {}, worst {:.3g})", exact, holding, seed,
                        worst)};
}

Outcome certificate_soundness() {
    int agree = 0;
    int ambiguous = 0;
    int failures = 0;
    int unsound = 0;
    const int total = 200;
    for (int k = 0; k < total; ++k) {
        const auto seed = static_cast<std::uint64_t>(k);
        Rng rng = make_stream(777, {seed});
        const auto sigs = sample_sphere_sequences(4, 40, rng);
        const auto gains = random_gains(1, 40, rng);
        const auto truth = sample_activity(1, 40, 4 + k % 11, rng);
        const auto signs = truth.cone_signs();
        const auto basis = common_nullspace(build_lift(sigs), gains);
        const auto v = cone_feasibility(basis, signs);
        const auto search = oracle::cone_search(basis.stacked, signs, 100, 2000, seed);
        const bool oracle_holds = search.best_residual > 1e-6;
        if (!v.holds.has_value()) {
            ++ambiguous;
            continue;
        }
        agree += *v.holds == oracle_holds ? 1 : 0;
        if (!*v.holds) {
            ++failures;
            const auto& x = v.certificate;
            const bool sound = x.size() == signs.size() && signs.cwiseProduct(x).minCoeff() >= 0.0 &&
                               std::abs(x.lpNorm<1>() - 1.0) <= 1e-9 &&
                               (basis.stacked * x).lpNorm<Eigen::Infinity>() <= 1e-7;
            unsound += sound ? 0 : 1;
        }
    }
    return {unsound == 0 && agree >= 190 && ambiguous <= 10,
            fmt::format("agreement {}/{}, ambiguous {}, unsound certificates {} of {}", agree, total, ambiguous,
                        unsound, failures)};
}

Outcome solver_numerics() {
    Rng rng(2024);
    const int B = 3;
    const int N = 8;
    const auto sigs = sample_sphere_sequences(4, B * N, rng);
    const auto gains = random_gains(B, B * N, rng);
    const auto truth = sample_activity(B, N, 2, rng);
    const auto covs = sample_covariance(simulate_received(sigs, gains, truth, 32, rng));

    double fd_worst = 0.0;
    std::uniform_real_distribution<double> u(0.05, 0.95);
    auto f = [&](const Eigen::VectorXd& a) { return objective(a, covs, sigs, gains); };
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd a(B * N);
        for (int i = 0; i < B * N; ++i) {
            a(i) = u(rng);
        }
        const Eigen::VectorXd g = gradient(a, covs, sigs, gains);
        const Eigen::VectorXd fd = oracle::central_difference(f, a, 1e-5);
        fd_worst = std::max(fd_worst, (g - fd).lpNorm<Eigen::Infinity>() / g.lpNorm<Eigen::Infinity>());
    }

    SolverState state(covs, sigs, gains, Eigen::VectorXd::Zero(B * N));
    double previous = state.objective();
    double worst_rise = -std::numeric_limits<double>::infinity();
    std::vector<int> order(B * N);
    std::iota(order.begin(), order.end(), 0);
    for (int sweep = 0; sweep < 50; ++sweep) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int i : order) {
            coordinate_update(i, state);
            const double now = state.objective();
            worst_rise = std::max(worst_rise, now - previous);
            previous = now;
        }
    }
    const double drift = state.inverse_drift();

    Rng tiny_rng(15);
    const auto tiny_sigs = sample_sphere_sequences(2, 2, tiny_rng);
    const auto tiny_gains = random_gains(1, 2, tiny_rng);
    const auto tiny_truth = sample_activity(1, 2, 1, tiny_rng);
    const auto tiny_covs = sample_covariance(simulate_received(tiny_sigs, tiny_gains, tiny_truth, 4, tiny_rng));
    const auto tiny = solve(tiny_covs, tiny_sigs, tiny_gains, {}, tiny_rng);
    const double solved = objective(tiny.estimate.a, tiny_covs, tiny_sigs, tiny_gains);
    double grid = std::numeric_limits<double>::infinity();
    Eigen::VectorXd a(2);
    for (int x = 0; x <= 1000; ++x) {
        for (int y = 0; y <= 1000; ++y) {
            a << x / 1000.0, y / 1000.0;
            grid = std::min(grid, oracle::dense_objective(a, tiny_covs, tiny_sigs, tiny_gains));
        }
    }

    const bool pass = fd_worst < 1e-5 && drift < 1e-8 && worst_rise <= 1e-10 && solved <= grid + 1e-4;
    return {pass, fmt::format("fd rel err {:.2g}, inverse drift {:.2g}, max rise {:.2g}, tiny gap {:.2g}", fd_worst,
                              drift, worst_rise, solved - grid)};
}

Outcome qp_machinery() {
    Rng rng(6);
    double worst_gap = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int M = 16;
        const Eigen::MatrixXd J = random_spd(8, rng, t % 2 == 0 ? 1e-3 : 1.0);
        const auto model = make_fisher_model(J, M);
        Eigen::VectorXd x(8), signs(8);
        for (int i = 0; i < 8; ++i) {
            x(i) = 2.0 * standard_normal(rng);
            signs(i) = (rng() & 1u) ? 1.0 : -1.0;
        }
        const auto s = sign_constrained_qp(x, model, signs);
        const double best = oracle::qp_by_enumeration(J, M, x, signs);
        worst_gap = std::max(worst_gap, std::abs(s.objective - best) / std::max(1.0, best));
    }

    auto c = default_config(ExperimentKind::Roc);
    const Instance inst = make_instance(c, 3, 16, derive_seed(1, {kGeometryStream}), derive_seed(1, {kSignatureStream}));
    Rng activity_rng = make_stream(1, {kActivityStream});
    const auto truth = sample_activity(3, 50, 8, activity_rng);
    const auto model = fisher_info(truth, inst.sigs, inst.gains, 128);
    const auto samples = theory_samples(truth, model, 500, 99, resolve_thread_count(0));
    int accepted = 0;
    double worst_kkt = 0.0;
    for (const auto& s : samples) {
        if (s.converged) {
            ++accepted;
            worst_kkt = std::max(worst_kkt, s.kkt_residual);
        }
    }

    const int n = 20;
    const int rank = 15;
    Eigen::MatrixXd A(n, rank);
    for (int r = 0; r < n; ++r) {
        for (int col = 0; col < rank; ++col) {
            A(r, col) = standard_normal(rng);
        }
    }
    const int M = 8;
    const auto low_rank = make_fisher_model(M * A * A.transpose(), M);
    const Eigen::MatrixXd target = M * low_rank.pseudo_inverse();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        const Eigen::VectorXd x = pinv_sample(low_rank, rng);
        cov.noalias() += x * x.transpose();
    }
    cov /= draws;
    const double cov_err = spectral_norm(cov - target) / spectral_norm(target);

    const bool pass = worst_gap <= 1e-8 && accepted > 0 && worst_kkt <= 1e-6 && cov_err <= 0.05;
    return {pass, fmt::format("enumeration gap {:.2g}, KKT {:.2g} over {} accepted, pinv covariance err {:.3f}",
                              worst_gap, worst_kkt, accepted, cov_err)};
}

// PM of a curve at a given PF by linear interpolation between its points,
// which are ordered by threshold (PF non-increasing).
double pm_at_pf(const RocCurve& c, double pf) {
    const std::size_t n = c.pf.size();
    if (pf >= c.pf.front()) {
        return c.pm.front();
    }
    if (pf <= c.pf.back()) {
        return c.pm.back();
    }
    for (std::size_t k = 1; k < n; ++k) {
        if (c.pf[k] <= pf && pf <= c.pf[k - 1]) {
            if (c.pf[k - 1] == c.pf[k]) {
                return std::min(c.pm[k - 1], c.pm[k]);
            }
            const double w = (c.pf[k - 1] - pf) / (c.pf[k - 1] - c.pf[k]);
            return c.pm[k - 1] + w * (c.pm[k] - c.pm[k - 1]);
        }
    }
    return c.pm.back();
}

Outcome roc_agreement(unsigned threads) {
    auto c = default_config(ExperimentKind::Roc);
    c.antennas = {64, 128};
    const auto result = run_roc(c, threads);
    const RocCurve* emp64 = nullptr;
    const RocCurve* emp128 = nullptr;
    const RocCurve* th128 = nullptr;
    for (const auto& curve : result.curves) {
        if (curve.source == RocSource::Empirical) {
            (curve.antennas == 64 ? emp64 : emp128) = &curve;
        } else if (curve.antennas == 128) {
            th128 = &curve;
        }
    }
    std::size_t nearest = 0;
    for (std::size_t k = 0; k < emp128->pf.size(); ++k) {
        if (std::abs(emp128->pf[k] - 1e-2) < std::abs(emp128->pf[nearest] - 1e-2)) {
            nearest = k;
        }
    }
    const double pf = emp128->pf[nearest];
    const double pm_emp = emp128->pm[nearest];
    const double pm_th = pm_at_pf(*th128, pf);
    const double ratio = pm_emp > 0.0 && pm_th > 0.0 ? std::max(pm_emp / pm_th, pm_th / pm_emp)
                         : pm_emp == pm_th         ? 1.0
                                                   : std::numeric_limits<double>::infinity();

    // One missed device out of all active-device trials is the resolution of
    // the empirical PM.
    const double resolution = 1.0 / (static_cast<double>(c.trials) * c.active.front() * c.cells.front());
    int violations = 0;
    for (std::size_t k = 0; k < emp128->pf.size(); ++k) {
        if (emp128->pf[k] > emp64->pf.front() || emp128->pf[k] < emp64->pf.back()) {
            continue;
        }
        violations += emp128->pm[k] > pm_at_pf(*emp64, emp128->pf[k]) + resolution ? 1 : 0;
    }
    return {ratio <= 3.0 && violations == 0,
            fmt::format("PF {:.3g}: empirical PM {:.3g}, predicted PM {:.3g} (ratio {:.3g}); M=128 above M=64 at {} "
                        "matched PF points",
                        pf, pm_emp, pm_th, ratio, violations)};
}

Outcome lemma3_saturation() {
    auto c = default_config(ExperimentKind::Lemma3);
    c.cells = {7, 19, 37};
    const auto rows = run_lemma3(c);
    std::map<int, double> total;
    std::map<int, std::vector<double>> rings;
    for (const auto& r : rows) {
        total[r.cells] = r.cumulative_sum;
        rings[r.cells].push_back(r.contribution);
    }
    const double inc_small = total[19] - total[7];
    const double inc_large = total[37] - total[19];
    bool decreasing = true;
    for (const auto& [B, contrib] : rings) {
        for (std::size_t r = 2; r < contrib.size(); ++r) {
            decreasing = decreasing && contrib[r] < contrib[r - 1];
        }
    }
    return {inc_large < inc_small && decreasing,
            fmt::format("S(7)={:.4g} S(19)={:.4g} S(37)={:.4g}; increments {:.3g} then {:.3g}; rings 1..3 {:.3g}",
                        total[7], total[19], total[37], inc_small, inc_large,
                        fmt::join(rings[37].begin() + 1, rings[37].end(), " "))};
}

Outcome determinism() {
    unsigned many = std::max(3u, resolve_thread_count(0));
    std::vector<std::string> mismatched;

    auto pd = default_config(ExperimentKind::PhaseDiagram);
    pd.cells = {1, 3};
    pd.devices_per_cell = 20;
    pd.lengths = {3, 4};
    pd.active = parse_int_list("0:20:4");
    pd.trials = 5;
    const auto pd_ref = phase_diagram_csv(run_phase_diagram(pd, 1));
    const auto pd_again = run_phase_diagram(pd, 1);
    const auto pd_many = run_phase_diagram(pd, many);
    if (pd_ref != phase_diagram_csv(pd_again) || pd_ref != phase_diagram_csv(pd_many) ||
        transitions_csv(pd_again, 20) != transitions_csv(pd_many, 20)) {
        mismatched.push_back("phase-diagram");
    }

    auto roc = default_config(ExperimentKind::Roc);
    roc.cells = {2};
    roc.devices_per_cell = 20;
    roc.active = {3};
    roc.lengths = {8};
    roc.antennas = {16, 32};
    roc.trials = 10;
    roc.theory_samples = 50;
    const auto roc_ref = roc_csv(run_roc(roc, 1));
    if (roc_ref != roc_csv(run_roc(roc, 1)) || roc_ref != roc_csv(run_roc(roc, many))) {
        mismatched.push_back("roc");
    }

    const auto l3 = default_config(ExperimentKind::Lemma3);
    if (lemma3_csv(run_lemma3(l3)) != lemma3_csv(run_lemma3(l3))) {
        mismatched.push_back("lemma3");
    }

    auto det = default_config(ExperimentKind::Detect);
    const auto d1 = run_detect(det);
    const auto d2 = run_detect(det);
    if (detect_summary_csv(d1) != detect_summary_csv(d2) || detect_trace_csv(d1) != detect_trace_csv(d2)) {
        mismatched.push_back("detect");
    }
    return {mismatched.empty(), mismatched.empty()
                                    ? fmt::format("all experiment CSVs identical across re-runs and 1 vs {} threads",
                                                  many)
                                    : fmt::format("mismatch in {}", fmt::join(mismatched, ", "))};
}

} // namespace

int main() {
    const unsigned threads = resolve_thread_count(0);
    int unexpected = 0;
    auto report = [&](int id, const char* name, auto&& run) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool known = kKnownUnattainable.count(id) > 0;
        std::cout << fmt::format("{} criterion {} {}: {} [{:.1f}s]{}\n", o.pass ? "PASS" : "FAIL", id, name, o.detail,
                                 secs, !o.pass && known ? " (known unattainable)" : "")
                  << std::flush;
        if (!o.pass && !known) {
            ++unexpected;
        }
    };

    PhaseDiagramResult pd;
    report(1, "phase-diagram overlap", [&] {
        pd = overlap_sweep(threads);
        return phase_overlap(pd);
    });
    report(2, "quadratic scaling", [&] { return quadratic_scaling(pd); });
    report(3, "asymptotic exactness", asymptotic_exactness);
    report(4, "certificate soundness", certificate_soundness);
    report(5, "solver numerics", solver_numerics);
    report(6, "QP and pseudo-inverse machinery", qp_machinery);
    report(7, "ROC agreement", [&] { return roc_agreement(threads); });
    report(8, "interference saturation", lemma3_saturation);
    report(9, "determinism", determinism);
    return unexpected == 0 ? 0 : 1;
}
