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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qndwork/exactsim/dynamics.hpp"
#include "qndwork/kernels.hpp"
#include "qndwork/markovian.hpp"
#include "qndwork/quadrature.hpp"
#include "qndwork/work.hpp"

using namespace qndwork;
using namespace qndwork::exactsim;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SupersystemModel model(double beta, int n_modes, double Omega = 2.5, bool probe = false, PulseSpec pulse = {}) {
    Discretization disc;
    disc.n_modes = n_modes;
    DriveSpec d = fixtures::fig1_drive(1.0);
    d.Omega = Omega;
    if (probe && pulse.t_m == 0.0) pulse.t_m = d.t_start;
    return make_model(fixtures::fig1_bath(0.2, beta), d, disc, probe, pulse);
}

double rel(double a, double b) {
    return fixtures::rel_diff(a, b);
}

Verdict measurement_cost() {
    double worst_sb = 0.0, worst_books = 0.0, min_cost = kInfinity;
    for (int n : {4, 5, 6}) {
        const SupersystemModel m = model(3.74, n);
        const Operators ops = build_operators(m, false);
        const ThermalState eq = thermal_state(m, ops, 3.74);
        const MeasurementLedger ml = measure(ops, eq, m.drive.omega_a);
        const double dE = ml.E_after - ml.E_before;
        worst_sb = std::max(worst_sb, std::abs(ml.sb_after));
        worst_books = std::max(worst_books, std::abs(dE + ml.sb_before));
        min_cost = std::min(min_cost, dE);
    }
    return {worst_sb <= 1e-10 && worst_books <= 1e-10 && min_cost > 0.0,
            fmt("max|<H_SB>_after|=%.2e, max|dE_meas+<H_SB>_eq|=%.2e, min dE_meas=%.6f", worst_sb, worst_books,
                min_cost)};
}

Verdict fig1_run() {
    const SupersystemModel m = model(3.74, 5);
    const CycleResult c = measurement_cycle(m, {}, false);
    const auto &es = c.trace.E_S;
    const double excursion = *std::max_element(es.begin(), es.end()) - *std::min_element(es.begin(), es.end());
    const double e_before = expectation(thermal_state(m, build_operators(m, false), 3.74).rho,
                                        build_operators(m, false).sz_half) *
                            m.drive.omega_a;
    const double back = std::abs(es.back() - e_before);
    const double piston = c.trace.E_piston.back();
    const double w_tot = *c.ledger.W_tot;
    const bool ok = piston > 0.0 && back <= 0.05 * excursion && w_tot < 0.0;
    return {ok, fmt("t_end=%.4f E_piston(t_end)=%.5f |E_S(t_end)-E_S(t_m)|/excursion=%.4f W_tot=%.5f "
                    "dE_meas=%.5f",
                    c.trace.t.back(), piston, back / excursion, w_tot, *c.ledger.dE_meas)};
}

double quadrature_work(const BathSpec &b, const DriveSpec &d, std::size_t points) {
    KernelOptions o;
    o.points_per_period = points;
    const KernelTable k = relaxation_integrals(b, d, o);
    return cycle_work_quadrature(polarization_trajectory(k, equilibrium_polarization(b.beta, d.omega_a)), d);
}

Verdict inset() {
    const BathSpec b = fixtures::fig1_bath();
    std::ostringstream os;
    bool any_positive = false;
    bool long_ok = true;
    for (double tc : {2.0, 2.5132741228718345, 4.0, 6.0}) {
        DriveSpec d = fixtures::fig1_drive();
        d.Omega = 2.0 * std::numbers::pi / tc;
        const double w = quadrature_work(b, d, 1000);
        any_positive |= w > 0.0;
        os << fmt("W(%.2f)=%.2e ", tc, w);
    }
    for (double tc : {110.0, 160.0}) {
        DriveSpec d = fixtures::fig1_drive();
        d.Omega = 2.0 * std::numbers::pi / tc;
        const double w = quadrature_work(b, d, static_cast<std::size_t>(tc / 0.05));
        long_ok &= w <= 1e-6;
        os << fmt("W(%.0f)=%.2e ", tc, w);
    }
    return {any_positive && long_ok, os.str()};
}

Verdict routes() {
    const BathSpec b = fixtures::fig1_bath(0.2, kInfinity);
    double worst = 0.0;
    double at = 0.0;
    std::ostringstream os;
    for (int i = 0; i < 10; ++i) {
        const double Omega = 1.0 + i;
        const DriveSpec d{1.0, 0.02 * Omega, Omega, 0.0, 0.0};
        KernelOptions o;
        o.points_per_period = 2000;
        const KernelTable k = polarization_trajectory(relaxation_integrals(b, d, o), -0.5);
        const double q = cycle_work_quadrature(k, d);
        const double a = cycle_work_approx(k, d);
        const double c = cycle_work_closed_form(b, d, o);
        const double gap = std::max({rel(q, a), rel(q, c), rel(a, c)});
        if (gap > worst) {
            worst = gap;
            at = Omega;
        }
        os << fmt("[%g: %.3e %.3e %.3e] ", Omega, q, c, a);
    }
    return {worst <= 0.15, fmt("max pairwise relative gap %.3f at Omega=%g; ", worst, at) + os.str()};
}

Verdict bound_identities() {
    double worst = 0.0;
    double w_sl_cold = 1.0, w_nsm_cold = 0.0;
    for (double beta : {0.5, 1.0, 3.74, 10.0, kInfinity}) {
        const SupersystemModel m = model(beta, 4);
        const Operators ops = build_operators(m, false);
        const MeasurementLedger ml = measure(ops, thermal_state(m, ops, beta), 1.0);
        const double T = std::isinf(beta) ? 0.0 : 1.0 / beta;
        worst = std::max(worst, std::abs(*ml.ledger.W_sel_max - *ml.ledger.W_nsm_max - T * ml.S_system));
        worst = std::max(worst, std::abs(*ml.ledger.W_sel_max - *ml.ledger.W_nsm_max - *ml.ledger.W_SL));
        if (std::isinf(beta)) {
            w_sl_cold = *ml.ledger.W_SL;
            w_nsm_cold = *ml.ledger.W_nsm_max;
        }
    }
    return {worst <= 1e-10 && w_sl_cold == 0.0 && w_nsm_cold > 0.0,
            fmt("max identity residual %.2e; at T=0 W_SL=%g W_nsm_max=%.5f", worst, w_sl_cold, w_nsm_cold)};
}

Verdict campaign() {
    const markovian::CampaignReport r = markovian::second_law_campaign(100, 2026, 1);
    double min_prod = kInfinity;
    for (const auto &c : r.cycles) min_prod = std::min(min_prod, c.entropy.min_production);
    return {r.max_W <= 1e-8 && min_prod >= -1e-10 && r.passed(),
            fmt("trials=%zu max W=%.3e min entropy production=%.3e max closure=%.1e", r.trials, r.max_W, min_prod,
                r.max_cycle_closure_error)};
}

Verdict total_work_grid() {
    double worst = -kInfinity;
    std::string where;
    int count = 0;
    for (double Omega : {1.5, 2.5, 4.0, 6.0, 8.0}) {
        for (double beta : {0.5, 1.0, 3.74, kInfinity}) {
            const CycleResult c = measurement_cycle(model(beta, 4, Omega), {}, false);
            ++count;
            if (*c.ledger.W_tot > worst) {
                worst = *c.ledger.W_tot;
                where = fmt("Omega=%g beta=%g", Omega, beta);
            }
        }
    }
    return {count == 20 && worst < 0.0, fmt("%d pairs, largest W_tot=%.4e at %s", count, worst, where.c_str())};
}

Verdict channel() {
    const PulseSpec pulse{1.0, 1e-5, false};
    const SupersystemModel m = model(3.74, 3, 2.5, true, pulse);
    const Operators ops = build_operators(m, false);
    const ThermalState eq = thermal_state(m, ops, 3.74);
    const DensityOperator after = nsm_channel(eq.rho);
    const double idem = (nsm_channel(after).matrix - after.matrix).cwiseAbs().maxCoeff();
    const double rs = (reduced_system(after) - reduced_system(eq.rho)).cwiseAbs().maxCoeff();
    const double rb = (reduced_bath(after) - reduced_bath(eq.rho)).cwiseAbs().maxCoeff();
    const double ds = von_neumann_entropy(after) - von_neumann_entropy(eq.rho);
    const SelectiveResult e = selective_channel(eq.rho, Outcome::e);
    const SelectiveResult g = selective_channel(eq.rho, Outcome::g);
    const double mix =
        (e.probability * e.rho.matrix + g.probability * g.rho.matrix - after.matrix).cwiseAbs().maxCoeff();
    const ProbeReuseReport rep = probe_reuse_check(m, eq.rho, probe_state(0.0), 0.5);
    const bool ok = idem == 0.0 && rs <= 1e-12 && rb <= 1e-12 && ds >= -1e-10 && rep.first_cycle_error <= 1e-6 &&
                    mix <= 1e-15;
    return {ok, fmt("idempotence=%.1e rho_S=%.1e rho_B=%.1e dS=%.4f CNOT-vs-NSM=%.2e mixture=%.1e", idem, rs, rb,
                    ds, rep.first_cycle_error, mix)};
}

Verdict cnot() {
    const PulseSpec pulse{1.0, 1e-3, false};
    Discretization disc;
    disc.n_modes = 1;
    const SupersystemModel m = make_model(fixtures::fig1_bath(0.0), fixtures::fig1_drive(1.0), disc, true, pulse);
    const Propagator prop(m, build_operators(m, true));
    const double f = cnot_fidelity(prop, 1.0 - 8e-3, 1.0 + 8e-3);
    QuadratureOptions q;
    q.abs_tol = 1e-11;
    q.rel_tol = 0.0;
    const std::vector<double> br{1.0 - 0.04, 1.0, 1.0 + 0.04};
    const double area =
        integrate_adaptive([&](double t) { return pulse_profile(pulse, t); }, std::span<const double>(br), q).value;
    const double err = std::abs(area + std::numbers::pi / 2.0);
    return {f >= 1.0 - 1e-4 && err <= 1e-10, fmt("fidelity=1-%.2e, |int h dt + pi/2|=%.2e", 1.0 - f, err)};
}

Verdict strokes() {
    double worst = 0.0;
    for (double beta : {0.5, 1.0, 3.74, 10.0, kInfinity}) {
        const SupersystemModel m = model(beta, 4);
        const Operators ops = build_operators(m, false);
        const MeasurementLedger ml = measure(ops, thermal_state(m, ops, beta), 1.0);
        const double T = std::isinf(beta) ? 0.0 : 1.0 / beta;
        const WorkLedger &w = ml.ledger;
        const double lhs = w.strokes.at(1).work + w.strokes.at(2).work;
        const double rhs = (ml.E_after - ml.E_before) - T * (ml.S_after - ml.S_before);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {worst <= 1e-12, fmt("max |W_sudden+W_isotherm-(dE-T dS)|=%.2e over 5 temperatures", worst)};
}

}  // namespace

int main() {
    const std::vector<Criterion> all{
        {1, "measurement cost identity", 10, measurement_cost},
        {2, "main-figure energy flows", 300, fig1_run},
        {3, "cycle-duration inset", 120, inset},
        {4, "route consistency", 120, routes},
        {5, "bound identities", 60, bound_identities},
        {6, "Markovian second-law campaign", 60, campaign},
        {7, "total-work negativity grid", 1800, total_work_grid},
        {8, "measurement-channel properties", 60, channel},
        {9, "CNOT pulse", 10, cnot},
        {10, "stroke ledger identity", 60, strokes},
    };
    int failures = 0;
    for (const Criterion &c : all) {
        const auto start = std::chrono::steady_clock::now();
        Verdict o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s [%.1f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
