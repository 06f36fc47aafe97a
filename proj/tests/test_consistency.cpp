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

#include "doctest.h"

#include "mcad/consistency.hpp"
#include "mcad/errors.hpp"
#include "mcad/mle_solver.hpp"
#include "mcad/rng.hpp"
#include "mcad/signatures.hpp"
#include "mcad/system_sim.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace mcad;

namespace {

GainTensor random_gains(int cells, int devices, Rng& rng) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    GainTensor gains;
    gains.gains.resize(cells, devices);
    for (int b = 0; b < cells; ++b) {
        for (int i = 0; i < devices; ++i) {
            gains.gains(b, i) = u(rng);
        }
    }
    gains.noise_var = 0.3;
    return gains;
}

void check_certificate(const ConsistencyVerdict& v, const NullspaceBasis& basis, const Eigen::VectorXd& signs) {
    REQUIRE(v.certificate.size() == signs.size());
    CHECK(signs.cwiseProduct(v.certificate).minCoeff() >= 0.0);
    CHECK(v.certificate.lpNorm<1>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((basis.stacked * v.certificate).lpNorm<Eigen::Infinity>() <= 1e-7);
}

} // namespace

TEST_CASE("trivial null space when L^2 >= N for one cell") {
    Rng rng(1);
    const auto sigs = sample_sphere_sequences(5, 25, rng);
    const auto gains = random_gains(1, 25, rng);
    const auto basis = common_nullspace(build_lift(sigs), gains);
    CHECK(basis.dim() == 0);
    CHECK(basis.U.cols() == 25);
    const auto truth = sample_activity(1, 25, 10, rng);
    const auto v = cone_feasibility(basis, truth.cone_signs());
    REQUIRE(v.holds.has_value());
    CHECK(*v.holds);
}

TEST_CASE("duplicate sequences put (1/g1, -1/g2) in the null space") {
    Rng rng(2);
    auto sigs = sample_sphere_sequences(4, 6, rng);
    sigs.S.col(1) = sigs.S.col(0);
    const auto gains = random_gains(1, 6, rng);
    const auto basis = common_nullspace(build_lift(sigs), gains);
    REQUIRE(basis.dim() >= 1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(6);
    x(0) = 1.0 / gains.gains(0, 0);
    x(1) = -1.0 / gains.gains(0, 1);
    const Eigen::VectorXd projected = basis.V * (basis.V.transpose() * x);
    CHECK((projected - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("dimension count lower bound and basis invariants") {
    Rng rng(3);
    const auto sigs = sample_sphere_sequences(6, 150, rng);
    const auto gains = random_gains(3, 150, rng);
    const auto lift = build_lift(sigs);
    const auto basis = common_nullspace(lift, gains);
    CHECK(basis.dim() >= 150 - 108);
    CHECK(basis.dim() + basis.U.cols() == 150);
    const Eigen::MatrixXd gram = basis.V.transpose() * basis.V;
    CHECK((gram - Eigen::MatrixXd::Identity(basis.dim(), basis.dim())).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((basis.U.transpose() * basis.V).cwiseAbs().maxCoeff() <= 1e-10);
    const int rows = static_cast<int>(lift.W.rows());
    for (int b = 0; b < 3; ++b) {
        const Eigen::MatrixXd block = basis.stacked.middleRows(b * rows, rows);
        CHECK((block * basis.V).norm() <= 10.0 * basis.svd_tol * block.norm());
        // The balanced block is W diag(g_b) up to one positive factor.
        const Eigen::MatrixXd raw = lift.W * gains.gains.row(b).transpose().asDiagonal();
        CHECK((raw * basis.V).norm() <= 10.0 * basis.svd_tol * raw.norm() * gains.gains.row(b).maxCoeff());
    }
}

TEST_CASE("gains spanning many orders of magnitude keep far blocks") {
    Rng rng(4);
    const auto sigs = sample_sphere_sequences(4, 40, rng);
    auto gains = random_gains(2, 40, rng);
    gains.gains.row(1) *= 1e-12;
    const auto basis = common_nullspace(build_lift(sigs), gains);
    // Each block has rank 16, so the intersection has dimension 40 - 32.
    CHECK(basis.dim() == 8);
}

TEST_CASE("all-zero gains are rejected") {
    Rng rng(5);
    const auto sigs = sample_sphere_sequences(3, 4, rng);
    GainTensor gains;
    gains.gains = Eigen::MatrixXd::Zero(1, 4);
    CHECK_THROWS_AS(common_nullspace(build_lift(sigs), gains), ParameterError);
}

TEST_CASE("no actives and all actives both hold") {
    Rng rng(6);
    const auto sigs = sample_sphere_sequences(4, 60, rng);
    const auto gains = random_gains(2, 60, rng);
    const auto basis = common_nullspace(build_lift(sigs), gains);
    REQUIRE(basis.dim() > 0);
    for (double sign : {1.0, -1.0}) {
        const auto v = cone_feasibility(basis, Eigen::VectorXd::Constant(60, sign));
        REQUIRE(v.holds.has_value());
        CHECK(*v.holds);
    }
}

TEST_CASE("co-located duplicate pair with mixed activity fails on the pair") {
    Rng rng(7);
    auto sigs = sample_sphere_sequences(5, 20, rng);
    sigs.S.col(4) = sigs.S.col(3);
    auto gains = random_gains(2, 20, rng);
    gains.gains.col(4) = gains.gains.col(3);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(20);
    a(3) = 1.0;
    const auto truth = ActivityPattern::from_vector(a, 2);
    const auto basis = common_nullspace(build_lift(sigs), gains);
    for (LpForm form : {LpForm::Alternative, LpForm::RowSpace, LpForm::NullBasis}) {
        ConsistencyOptions opts;
        opts.form = form;
        const auto v = cone_feasibility(basis, truth.cone_signs(), opts);
        REQUIRE(v.holds.has_value());
        CHECK_FALSE(*v.holds);
        CHECK(v.lp_status == LpStatus::Feasible);
        check_certificate(v, basis, truth.cone_signs());
        CHECK(v.certificate(3) == doctest::Approx(-0.5).epsilon(1e-9));
        CHECK(v.certificate(4) == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("all LP forms agree and certificates are sound") {
    int fails = 0;
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng(1000 + seed);
        const int cells = seed % 2 == 0 ? 1 : 2;
        const int per_cell = cells == 1 ? 20 : 16;
        const auto sigs = sample_sphere_sequences(3, cells * per_cell, rng);
        const auto gains = random_gains(cells, cells * per_cell, rng);
        const auto truth = sample_activity(cells, per_cell, 2 + static_cast<int>(seed % 8), rng);
        const auto basis = common_nullspace(build_lift(sigs), gains);
        const auto signs = truth.cone_signs();
        std::optional<bool> reference;
        for (LpForm form : {LpForm::Alternative, LpForm::RowSpace, LpForm::NullBasis}) {
            ConsistencyOptions opts;
            opts.form = form;
            const auto v = cone_feasibility(basis, signs, opts);
            REQUIRE(v.holds.has_value());
            if (!reference) {
                reference = v.holds;
            }
            CHECK(*v.holds == *reference);
            if (!*v.holds) {
                check_certificate(v, basis, signs);
            }
        }
        (*reference ? holds : fails) += 1;
    }
    CHECK(holds > 5);
    CHECK(fails > 5);
}

TEST_CASE("verdicts agree with a projected-gradient search") {
    int agree = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(5000 + seed);
        const auto sigs = sample_sphere_sequences(5, 40, rng);
        const auto gains = random_gains(1, 40, rng);
        const auto truth = sample_activity(1, 40, 2 + static_cast<int>(seed % 12), rng);
        const auto basis = common_nullspace(build_lift(sigs), gains);
        const auto v = cone_feasibility(basis, truth.cone_signs());
        const auto search = oracle::cone_search(basis.stacked, truth.cone_signs(), 100, 2000, seed);
        const bool oracle_holds = search.best_residual > 1e-6;
        ++total;
        agree += v.holds.has_value() && *v.holds == oracle_holds;
    }
    CHECK(agree >= 98);
}

TEST_CASE("failing certificates are flat directions of the population objective") {
    Rng rng(8);
    int checked = 0;
    for (int trial = 0; trial < 40 && checked < 3; ++trial) {
        const auto sigs = sample_sphere_sequences(3, 20, rng);
        const auto gains = random_gains(1, 20, rng);
        const auto truth = sample_activity(1, 20, 8, rng);
        const auto v = check_consistency(sigs, gains, truth);
        if (!v.holds.has_value() || *v.holds) {
            continue;
        }
        ++checked;
        const auto covs = model_covariance(sigs, gains, truth.a);
        const double base = objective(truth.a, covs, sigs, gains);
        double t_max = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 20; ++i) {
            const double x = v.certificate(i);
            if (x > 0.0) {
                t_max = std::min(t_max, (1.0 - truth.a(i)) / x);
            } else if (x < 0.0) {
                t_max = std::min(t_max, -truth.a(i) / x);
            }
        }
        for (double frac : {0.25, 0.5, 1.0}) {
            const Eigen::VectorXd moved = (truth.a + frac * t_max * v.certificate).cwiseMax(0.0).cwiseMin(1.0);
            CHECK(objective(moved, covs, sigs, gains) - base <= 1e-6);
        }
    }
    CHECK(checked == 3);
}

TEST_CASE("success probability falls with K up to half load") {
    // B=1, N=40, L=4, 100 trials per K. The sign cone is symmetric under
    // swapping the active and inactive sets, so the sweep stops at N/2.
    const int trials = 100;
    std::vector<double> rate;
    for (int K = 0; K <= 20; K += 2) {
        int holds = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng(derive_seed(9, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(t)}));
            const auto sigs = sample_sphere_sequences(4, 40, rng);
            const auto gains = random_gains(1, 40, rng);
            const auto truth = sample_activity(1, 40, K, rng);
            holds += check_consistency(sigs, gains, truth).holds.value_or(false);
        }
        rate.push_back(static_cast<double>(holds) / trials);
    }
    CHECK(rate.front() == 1.0);
    for (std::size_t k = 1; k < rate.size(); ++k) {
        const double p = 0.5 * (rate[k] + rate[k - 1]);
        const double se = std::sqrt(std::max(p * (1.0 - p), 0.01) / trials);
        CHECK(rate[k] <= rate[k - 1] + 3.0 * se);
    }
    CHECK(rate.back() < 0.5);
}

TEST_CASE("pivot cap yields an ambiguous verdict without a decision") {
    Rng rng(10);
    const auto sigs = sample_sphere_sequences(4, 40, rng);
    const auto gains = random_gains(1, 40, rng);
    const auto truth = sample_activity(1, 40, 10, rng);
    ConsistencyOptions opts;
    opts.simplex.max_pivots = 2;
    const auto v = check_consistency(sigs, gains, truth, opts);
    CHECK(v.lp_status == LpStatus::Ambiguous);
    CHECK_FALSE(v.holds.has_value());
    CHECK(std::string(to_string(v.lp_status)) == "numerically_ambiguous");
}

TEST_CASE("verdicts are deterministic") {
    Rng rng(11);
    const auto sigs = sample_sphere_sequences(4, 30, rng);
    const auto gains = random_gains(1, 30, rng);
    const auto truth = sample_activity(1, 30, 6, rng);
    const auto a = check_consistency(sigs, gains, truth);
    const auto b = check_consistency(sigs, gains, truth);
    CHECK(a.holds == b.holds);
    CHECK(a.pivots == b.pivots);
    CHECK(a.certificate == b.certificate);
}
