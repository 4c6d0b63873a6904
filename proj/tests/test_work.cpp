// Copyright 2026 The qndwork Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracle_values.hpp"
#include "qndwork/kernels.hpp"
#include "qndwork/work.hpp"

using namespace qndwork;

namespace {

KernelTable fig1_table(const BathSpec &b, const DriveSpec &d, std::size_t points = 2000) {
    KernelOptions o;
    o.points_per_period = points;
    const double s0 = equilibrium_polarization(b.beta, d.omega_a);
    return polarization_trajectory(relaxation_integrals(b, d, o), s0);
}

KernelTable synthetic(const DriveSpec &d, auto &&je, auto &&jg, std::size_t n = 2000) {
    KernelTable k;
    k.t = uniform_grid(0.0, period(d), n);
    for (double t : k.t) {
        k.J_e.push_back(je(t));
        k.J_g.push_back(jg(t));
        k.dJ.push_back(0.5 * (k.J_g.back() - k.J_e.back()));
    }
    return k;
}

}  // namespace

TEST(Work, NoModulationNoWork) {
    DriveSpec d = fixtures::fig1_drive();
    d.delta = 0.0;
    const KernelTable k = fig1_table(fixtures::fig1_bath(), d, 400);
    EXPECT_EQ(cycle_work_quadrature(k, d), 0.0);
    EXPECT_EQ(cycle_work_closed_form(fixtures::fig1_bath(0.2, kInfinity), d), 0.0);
}

TEST(Work, ConstantPolarizationDoesNoWork) {
    const DriveSpec d = fixtures::fig1_drive();
    KernelTable k = synthetic(d, [](double) { return 0.0; }, [](double) { return 0.0; });
    k.s.assign(k.size(), -0.37);
    EXPECT_NEAR(cycle_work_quadrature(k, d), 0.0, 1e-15);
}

TEST(Work, LinearGrowthGivesNoApproximateWork) {
    const DriveSpec d = fixtures::fig1_drive();
    const KernelTable zero = synthetic(d, [](double) { return 0.0; }, [](double) { return 0.0; });
    EXPECT_EQ(cycle_work_approx(zero, d), 0.0);
    const KernelTable lin = synthetic(d, [](double) { return 0.0; }, [](double t) { return 0.3 * t; });
    EXPECT_NEAR(cycle_work_approx(lin, d), 0.0, 1e-12);
}

TEST(Work, Fig1CycleWorkPositiveAndMatchesTrapezoidOracle) {
    const DriveSpec d = fixtures::fig1_drive();
    const double w = cycle_work_quadrature(fig1_table(fixtures::fig1_bath(), d), d);
    EXPECT_GT(w, 0.0);
    EXPECT_LT(fixtures::rel_diff(w, oracle::kWorkFig1Trapezoid), 1e-4);
}

TEST(Work, ClosedFormZeroCases) {
    EXPECT_EQ(cycle_work_closed_form(fixtures::fig1_bath(0.0, kInfinity), fixtures::fig1_drive()), 0.0);
    EXPECT_THROW(cycle_work_closed_form(fixtures::fig1_bath(0.2, 3.74), fixtures::fig1_drive()), ConfigError);
}

TEST(Work, ClosedFormMatchesRiemannOracleAndQuadrature) {
    const BathSpec b{0.2, 10.0 / 7.0, 10.0, kInfinity};
    const DriveSpec d{1.0, 0.05, 2.5, 0.0, 0.0};
    const double cf = cycle_work_closed_form(b, d);
    EXPECT_LT(fixtures::rel_diff(cf, oracle::kClosedFormDelta005), 1e-6);
    const double quad = cycle_work_quadrature(fig1_table(b, d), d);
    EXPECT_LT(fixtures::rel_diff(cf, quad), 0.10);
}

TEST(Work, ClosedFormWarnsForStrongModulation) {
    std::string warning;
    cycle_work_closed_form(fixtures::fig1_bath(0.2, kInfinity), DriveSpec{1.0, 0.6, 2.5, 0.0, 0.0}, {}, &warning);
    EXPECT_FALSE(warning.empty());
    cycle_work_closed_form(fixtures::fig1_bath(0.2, kInfinity), DriveSpec{1.0, 0.05, 2.5, 0.0, 0.0}, {}, &warning);
    EXPECT_TRUE(warning.empty());
}

TEST(Work, ApproximationChangesSignOverOmega) {
    const BathSpec b = fixtures::fig1_bath(0.2, kInfinity);
    bool positive = false;
    bool negative = false;
    for (double Omega = 1.0; Omega <= 20.0; Omega *= 1.25) {
        const DriveSpec d{1.0, 0.02 * Omega, Omega, 0.0, 0.0};
        KernelOptions o;
        o.points_per_period = 400;
        const double w = cycle_work_approx(relaxation_integrals(b, d, o), d);
        positive |= w > 0.0;
        negative |= w < 0.0;
    }
    EXPECT_TRUE(positive && negative);
}

TEST(Work, SelectiveReducesToSharedDrive) {
    const DriveSpec d = fixtures::fig1_drive();
    const KernelTable k = fig1_table(fixtures::fig1_bath(), d, 400);
    for (double p : {0.0, 0.2, 0.7}) {
        const SelectiveWork w = selective_cycle_work(k, k, d, d, p);
        EXPECT_NEAR(w.W_sel, nsm_cycle_work(k, d, p), 1e-15);
    }
    DriveSpec still = d;
    still.delta = 0.0;
    EXPECT_EQ(selective_cycle_work(k, k, d, still, 0.0).W_sel, 0.0);
    DriveSpec other = d;
    other.Omega = 3.0;
    EXPECT_THROW(selective_cycle_work(k, k, d, other, 0.5), ConfigError);
}

// Independent drives per outcome can always reproduce the shared drive, so
// the selective optimum over a phase grid dominates the non-selective one.
TEST(Work, SelectiveOptimumDominatesSharedDrive) {
    const BathSpec b = fixtures::fig1_bath();
    const double p_e = 0.3;
    std::vector<DriveSpec> drives;
    std::vector<KernelTable> tables;
    KernelOptions o;
    o.points_per_period = 400;
    for (int i = 0; i < 6; ++i) {
        DriveSpec d = fixtures::fig1_drive();
        d.phase = i * std::numbers::pi / 3.0;
        drives.push_back(d);
        tables.push_back(relaxation_integrals(b, d, o));
    }
    double best_nsm = -kInfinity, best_sel = -kInfinity;
    for (std::size_t g = 0; g < drives.size(); ++g) {
        best_nsm = std::max(best_nsm, nsm_cycle_work(tables[g], drives[g], p_e));
        for (std::size_t e = 0; e < drives.size(); ++e) {
            const double w = selective_cycle_work(tables[e], tables[g], drives[e], drives[g], p_e).W_sel;
            best_sel = std::max(best_sel, w);
        }
    }
    EXPECT_GE(best_sel, best_nsm);
}

TEST(Work, BoundsAtZeroTemperature) {
    const WorkLedger w = bounds(0.02, 0.01, 0.0, 0.3);
    EXPECT_EQ(*w.W_SL, 0.0);
    EXPECT_EQ(*w.W_sel_max, 0.02);
    EXPECT_EQ(*w.W_nsm_max, 0.02);
}

TEST(Work, BoundsAtHalfProbability) {
    const WorkLedger w = bounds(0.0, 0.0, 1.0, 0.5);
    EXPECT_NEAR(*w.W_SL, std::log(2.0), 1e-15);
    EXPECT_EQ(*w.W_nsm_max, 0.0);
    EXPECT_NEAR(*w.W_sel_max, std::log(2.0), 1e-15);
    EXPECT_THROW(bounds(0.0, -1.0, 1.0, 0.5), ConfigError);
}

TEST(Work, StrokeIdentityForArbitraryInputs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double T = std::abs(u(rng)) * 3.0;
        const WorkLedger w = optimal_cycle_ledger(u(rng), u(rng), u(rng), u(rng), u(rng), T);
        ASSERT_EQ(w.strokes.size(), 3u);
        const double total = w.strokes[1].work + w.strokes[2].work;
        EXPECT_NEAR(total, *w.dE_meas - T * *w.dS_meas, 1e-12);
        EXPECT_NEAR(*w.W_nsm_max, total, 1e-15);
    }
}

TEST(Work, IdenticalStatesGiveZeroStrokes) {
    const WorkLedger w = optimal_cycle_ledger(-0.4, -0.4, 0.2, 0.2, -0.4 + 0.0, 0.5);
    for (const Stroke &s : w.strokes) {
        EXPECT_NEAR(s.work, 0.0, 1e-15);
        EXPECT_NEAR(s.energy_change, 0.0, 1e-15);
    }
}

TEST(Work, LedgerJsonFieldNames) {
    const nlohmann::json j = bounds(0.1, 0.05, 0.5, 0.25);
    for (const char *key : {"dE_meas", "dS_meas", "W_cycle", "W_tot", "W_SL", "W_nsm_max", "W_sel_max", "strokes"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["W_cycle"].is_null());
}

TEST(Work, MarkovianLinearKernelsGiveNoPositiveWork) {
    // Golden-rule rates, linear J at the carrier, relaxed initial state.
    const BathSpec b = fixtures::fig1_bath(0.2, 3.74);
    for (double Omega : {0.5, 1.5, 4.0}) {
        const DriveSpec d{1.0, 0.2, Omega, 0.0, 0.0};
        const double re = response(b, 1.0);
        const double rg = response(b, -1.0);
        KernelTable k = synthetic(d, [re](double t) { return re * t; }, [rg](double t) { return rg * t; });
        k = polarization_trajectory(k, 0.5 * (rg - re) / (rg + re));
        EXPECT_LE(cycle_work_quadrature(k, d), 1e-9);
    }
}
