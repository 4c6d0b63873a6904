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

#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qndwork/config.hpp"
#include "qndwork/exactsim/dynamics.hpp"
#include "qndwork/kernels.hpp"
#include "qndwork/markovian.hpp"
#include "qndwork/parallel.hpp"
#include "qndwork/work.hpp"

namespace qndwork {

/// Logger for progress lines; empty means silent.
using Log = std::function<void(const std::string &)>;

struct RunOptions {
    unsigned threads = 1;
    Log log;
};

inline void note(const RunOptions &run, const std::string &msg) {
    if (run.log) run.log(msg);
}

inline KernelOptions kernel_options(const ScenarioConfig &c, unsigned threads) {
    KernelOptions k;
    k.quadrature = c.tolerances.quadrature;
    k.cutoffs = c.tolerances.cutoffs;
    k.sideband_tolerance = c.tolerances.sideband;
    k.points_per_period = c.kernels.points_per_period;
    k.periods = static_cast<double>(c.kernels.periods);
    k.threads = threads;
    return k;
}

inline double initial_polarization(const ScenarioConfig &c) {
    return c.kernels.initial_polarization.value_or(equilibrium_polarization(c.bath.beta, c.drive.omega_a));
}

/// Kernel table with the polarization column for one configuration.
inline KernelTable compute_kernels(const ScenarioConfig &c, unsigned threads) {
    KernelTable k = relaxation_integrals(c.bath, c.drive, kernel_options(c, threads));
    return polarization_trajectory(std::move(k), initial_polarization(c), c.kernels.form, c.tolerances.derivative);
}

inline std::string run_kernels(const ScenarioConfig &c, const RunOptions &run = {}) {
    note(run, "kernels: " + std::to_string(c.kernels.points_per_period * c.kernels.periods + 1) + " time points");
    const KernelTable k = compute_kernels(c, run.threads);
    std::ostringstream os;
    write_csv(os, k);
    return os.str();
}

/// Configuration with one sweep variable replaced.
inline ScenarioConfig with_sweep_value(ScenarioConfig c, SweepVariable v, double x) {
    switch (v) {
        case SweepVariable::Omega: c.drive.Omega = x; break;
        case SweepVariable::t_cycle: c.drive.Omega = 2.0 * std::numbers::pi / x; break;
        case SweepVariable::T: c.bath.beta = x == 0.0 ? kInfinity : 1.0 / x; break;
        case SweepVariable::beta: c.bath.beta = x; break;
        case SweepVariable::delta: c.drive.delta = x; break;
    }
    validate(c.bath);
    validate(c.drive);
    return c;
}

inline exactsim::SupersystemModel exact_model(const ScenarioConfig &c, bool include_probe) {
    exactsim::PulseSpec pulse = c.exact.pulse;
    return exactsim::make_model(c.bath, c.drive, c.exact.discretization, include_probe, pulse);
}

struct SweepRow {
    double value = 0.0;
    double W_quadrature = 0.0;
    double W_closed_form = std::numeric_limits<double>::quiet_NaN();
    double W_approx = 0.0;
    double W_nsm_max = 0.0;
    double W_sel_max = 0.0;
    double W_SL = 0.0;
};

/// One sweep point: the three cycle-work routes from the relaxation
/// integrals, and the measurement bounds from the exact Gibbs state of the
/// discretized supersystem.
inline SweepRow sweep_point(const ScenarioConfig &c, double value) {
    SweepRow r;
    r.value = value;
    const KernelTable k = compute_kernels(c, 1);
    r.W_quadrature = cycle_work_quadrature(k, c.drive);
    r.W_approx = cycle_work_approx(k, c.drive);
    if (c.bath.zero_temperature() && c.drive.phase == 0.0) {
        KernelOptions ko = kernel_options(c, 1);
        r.W_closed_form = cycle_work_closed_form(c.bath, c.drive, ko);
    }
    const exactsim::SupersystemModel m = exact_model(c, false);
    const exactsim::Operators ops = exactsim::build_operators(m, false);
    const exactsim::ThermalState eq = exactsim::thermal_state(m, ops, c.bath.beta);
    const exactsim::MeasurementLedger ml = exactsim::measure(ops, eq, c.drive.omega_a);
    r.W_nsm_max = *ml.ledger.W_nsm_max;
    r.W_sel_max = *ml.ledger.W_sel_max;
    r.W_SL = *ml.ledger.W_SL;
    return r;
}

inline std::vector<SweepRow> work_sweep(const ScenarioConfig &c, const RunOptions &run = {}) {
    require(c.sweep.has_value(), "work-sweep needs a sweep section");
    const SweepSettings &sw = *c.sweep;
    std::vector<ScenarioConfig> points;
    for (double v : sw.values) points.push_back(with_sweep_value(c, sw.variable, v));
    std::vector<SweepRow> rows(points.size());
    parallel_for(points.size(), run.threads, [&](std::size_t i) {
        rows[i] = sweep_point(points[i], sw.values[i]);
        note(run, "sweep " + to_string(sw.variable) + "=" + std::to_string(sw.values[i]) + " done");
    });
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow> &rows) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "sweep_value,W_quadrature,W_closed_form,W_approx,W_nsm_max,W_sel_max,W_SL\n";
    for (const SweepRow &r : rows) {
        os << r.value << ',' << r.W_quadrature << ',';
        // Undefined closed form: empty cell.
        if (!std::isnan(r.W_closed_form)) os << r.W_closed_form;
        os << ',' << r.W_approx << ',' << r.W_nsm_max
           << ',' << r.W_sel_max << ',' << r.W_SL << '\n';
    }
    return os.str();
}

inline std::string run_work_sweep(const ScenarioConfig &c, const RunOptions &run = {}) {
    return sweep_csv(work_sweep(c, run));
}

struct ExactRun {
    exactsim::EnergyTrace trace;
    WorkLedger ledger;
    exactsim::MeasurementLedger measurement;
    std::size_t dimension = 0;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

/// The exact run without the convergence block. With a probe and a finite
/// pulse the measurement is the CNOT pulse on S+B+P; otherwise it is the
/// instantaneous channel at drive.t_start.
inline ExactRun exact_run(const ScenarioConfig &c, const RunOptions &run = {}) {
    using namespace exactsim;
    ExactRun out;
    const bool pulsed = c.exact.include_probe && !c.exact.pulse.instantaneous;
    const SupersystemModel m = exact_model(c, c.exact.include_probe);
    if (m.mode_freqs.front() <= 0.0 || c.bath.omega0 - c.exact.discretization.span_widths / c.bath.tc < 0.0) {
        out.warnings.push_back("mode window clamped at w = 0");
    }
    check_dimension(m, c.exact.include_probe);
    out.dimension = model_dimension(m, c.exact.include_probe);
    Operators ops = build_operators(m, false);
    const ThermalState eq = thermal_state(m, ops, c.bath.beta);
    out.measurement = measure(ops, eq, c.drive.omega_a);
    const double t_end = c.exact.t_end.value_or(c.drive.t_start + period(c.drive));
    PropagationOptions po;
    po.dt_max = c.exact.dt_max;
    po.tolerance = c.tolerances.propagation;
    note(run, "exact: dimension " + std::to_string(out.dimension));

    PropagationResult pr;
    if (c.exact.include_probe) {
        Propagator prop(m, build_operators(m, true));
        double t0 = c.drive.t_start;
        if (pulsed) t0 = std::min(t0, m.pulse.t_m - 8.0 * m.pulse.tau_m);
        DensityOperator tot = attach_probe(eq.rho, probe_state(c.exact.probe_polarization));
        tot.layout = prop.layout();
        if (!pulsed) {
            // Ideal CNOT on S+P: |e,p> -> |e,1-p>.
            const Layout &L = prop.layout();
            const auto M = static_cast<Eigen::Index>(L.bath_dim());
            Eigen::MatrixXcd flipped = tot.matrix;
            for (int s = 0; s < 2; ++s)
                for (int p = 0; p < 2; ++p)
                    for (int s2 = 0; s2 < 2; ++s2)
                        for (int p2 = 0; p2 < 2; ++p2) {
                            const int q = s == 1 ? 1 - p : p;
                            const int q2 = s2 == 1 ? 1 - p2 : p2;
                            flipped.block(static_cast<Eigen::Index>(L.index(s, q, 0)),
                                          static_cast<Eigen::Index>(L.index(s2, q2, 0)), M, M) =
                                tot.matrix.block(static_cast<Eigen::Index>(L.index(s, p, 0)),
                                                 static_cast<Eigen::Index>(L.index(s2, p2, 0)), M, M);
                        }
            tot.matrix = flipped;
        }
        require(t_end > t0, "exact.t_end must be later than the start of the run");
        pr = propagate(prop, tot, t0, t_end, po);
    } else {
        Propagator prop(m, std::move(ops));
        require(t_end > c.drive.t_start, "exact.t_end must be later than drive.t_start");
        pr = propagate(prop, out.measurement.rho_after, c.drive.t_start, t_end, po);
    }
    out.steps = pr.steps;
    out.trace = std::move(pr.trace);
    out.ledger = out.measurement.ledger;
    const double dE = out.measurement.E_after - out.measurement.E_before;
    // The single-bath bound only constrains closed cycles.
    const double cycles = (t_end - c.drive.t_start) / period(c.drive);
    const bool closed = std::abs(cycles - std::round(cycles)) <= 1e-9 * std::max(1.0, cycles);
    if (!closed) out.warnings.push_back("t_end does not close a drive period; W_tot is reported but not audited");
    const WorkLedger audit = total_work_audit(out.trace, dE, closed ? c.exact.audit_tolerance : kInfinity);
    out.ledger.W_cycle = audit.W_cycle;
    out.ledger.W_tot = audit.W_tot;
    return out;
}

struct ExactArtifacts {
    std::string csv;
    nlohmann::json ledger;
};

inline nlohmann::json exact_summary(const ExactRun &r) {
    nlohmann::json j;
    j["dimension"] = r.dimension;
    j["steps"] = r.steps;
    j["W_cycle"] = r.ledger.W_cycle ? nlohmann::json(*r.ledger.W_cycle) : nlohmann::json(nullptr);
    j["dE_meas"] = r.ledger.dE_meas ? nlohmann::json(*r.ledger.dE_meas) : nlohmann::json(nullptr);
    j["W_tot"] = r.ledger.W_tot ? nlohmann::json(*r.ledger.W_tot) : nlohmann::json(nullptr);
    return j;
}

/// Exact run plus the convergence block: the same cycle at 2 n_modes,
/// with the optional excitation cap for the larger run.
inline ExactArtifacts run_exact(const ScenarioConfig &c, const RunOptions &run = {}) {
    const ExactRun main = exact_run(c, run);
    ExactArtifacts out;
    std::ostringstream os;
    exactsim::write_csv(os, main.trace);
    out.csv = os.str();

    nlohmann::json j;
    j["ledger"] = main.ledger;
    j["measurement"] = {{"p_e", main.measurement.p_e},
                        {"E_before", main.measurement.E_before},
                        {"E_after", main.measurement.E_after},
                        {"S_before", main.measurement.S_before},
                        {"S_after", main.measurement.S_after},
                        {"S_system", main.measurement.S_system},
                        {"E_stab", main.measurement.E_stab},
                        {"H_SB_before", main.measurement.sb_before},
                        {"H_SB_after", main.measurement.sb_after}};
    j["dimension"] = main.dimension;
    j["steps"] = main.steps;
    j["warnings"] = main.warnings;

    nlohmann::json conv;
    conv["n_modes"] = c.exact.discretization.n_modes;
    conv["base"] = exact_summary(main);
    if (c.exact.convergence) {
        ScenarioConfig doubled = c;
        doubled.exact.discretization.n_modes *= 2;
        doubled.exact.discretization.max_excitations = c.exact.convergence_max_excitations;
        doubled.exact.include_probe = false;
        conv["doubled_n_modes"] = doubled.exact.discretization.n_modes;
        conv["doubled_max_excitations"] = doubled.exact.discretization.max_excitations
                                              ? nlohmann::json(*doubled.exact.discretization.max_excitations)
                                              : nlohmann::json(nullptr);
        try {
            note(run, "exact: convergence run at n_modes=" + std::to_string(doubled.exact.discretization.n_modes));
            const ExactRun big = exact_run(doubled, run);
            conv["doubled"] = exact_summary(big);
            const double a = *main.ledger.W_cycle;
            const double b = *big.ledger.W_cycle;
            conv["W_cycle_relative_change"] = a != 0.0 ? std::abs(b - a) / std::abs(a) : 0.0;
            conv["status"] = "done";
        } catch (const ConfigError &e) {
            conv["status"] = std::string("skipped: ") + e.what();
        }
    } else {
        conv["status"] = "disabled";
    }
    j["convergence"] = conv;
    out.ledger = std::move(j);
    return out;
}

inline nlohmann::json run_markovian(const ScenarioConfig &c, const RunOptions &run = {}) {
    markovian::CycleOptions opt;
    opt.points_per_period = c.markovian.points_per_period;
    if (c.markovian.mode == MarkovianSettings::Mode::golden_rule) {
        const markovian::GoldenRuleModel m{c.bath, c.drive};
        nlohmann::json j = markovian::closed_cycle_work(m, opt);
        j["mode"] = "golden_rule";
        return j;
    }
    note(run, "markovian: " + std::to_string(c.markovian.trials) + " trials, seed " + std::to_string(c.seed));
    nlohmann::json j = markovian::second_law_campaign(c.markovian.trials, c.seed, run.threads, opt);
    j["mode"] = "campaign";
    return j;
}

}  // namespace qndwork
