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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qndwork/bath.hpp"
#include "qndwork/kernels.hpp"
#include "qndwork/modulation.hpp"
#include "qndwork/quadrature.hpp"

namespace qndwork {

// Sign convention throughout: positive work is work extracted by the piston.

struct Stroke {
    std::string label;
    double work = 0.0;
    double energy_change = 0.0;
    double entropy_change = 0.0;
};

/// Energy and work bookkeeping of one measurement-triggered cycle. Fields
/// that a given computation does not produce stay empty (null in JSON).
struct WorkLedger {
    std::optional<double> dE_meas;
    std::optional<double> dS_meas;
    std::optional<double> W_cycle;
    std::optional<double> W_tot;
    std::optional<double> W_SL;
    std::optional<double> W_nsm_max;
    std::optional<double> W_sel_max;
    std::vector<Stroke> strokes;
};

inline void to_json(nlohmann::json &j, const Stroke &s) {
    j = nlohmann::json{{"label", s.label},
                       {"work", s.work},
                       {"energy_change", s.energy_change},
                       {"entropy_change", s.entropy_change}};
}

inline void to_json(nlohmann::json &j, const WorkLedger &w) {
    auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j = nlohmann::json::object();
    j["dE_meas"] = opt(w.dE_meas);
    j["dS_meas"] = opt(w.dS_meas);
    j["W_cycle"] = opt(w.W_cycle);
    j["W_tot"] = opt(w.W_tot);
    j["W_SL"] = opt(w.W_SL);
    j["W_nsm_max"] = opt(w.W_nsm_max);
    j["W_sel_max"] = opt(w.W_sel_max);
    j["strokes"] = w.strokes;
}

namespace detail {

/// Integral over the first drive period of f(i) * wdot(t_start + t_i).
template <PeriodicDrive D, class Series>
double cycle_integral(const std::vector<double> &t, const Series &series, const D &d) {
    const double T = period(d);
    require(!t.empty() && t.front() == 0.0, "cycle integral needs a table starting at t = 0");
    if (t.back() < T * (1.0 - 1e-9)) {
        throw NumericalError("kernel table does not cover a full drive period",
                             "t_end=" + std::to_string(t.back()) + " period=" + std::to_string(T));
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size() && t[i] <= T * (1.0 + 1e-9); ++i) {
        x.push_back(t[i]);
        y.push_back(series[i] * omega_dot(d, d.t_start + t[i]));
    }
    if (std::abs(x.back() - T) > 1e-9 * T) {
        throw NumericalError("kernel grid has no point at the end of the period");
    }
    return is_uniform(x) ? simpson(x, y) : trapezoid(x, y);
}

inline double sinc(double x) noexcept {
    if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace detail

/// W = -oint s(t) wdot(t) dt over one period, by composite quadrature on the
/// table grid.
template <PeriodicDrive D>
double cycle_work_quadrature(const KernelTable &k, const D &d) {
    require(k.has_polarization(), "cycle_work_quadrature needs the polarization column");
    return -detail::cycle_integral(k.t, k.s, d);
}

/// W = -oint J_g(t) wdot(t) dt: the weak-coupling, T = 0 reduction with
/// s(0) = -1/2. For a sinusoid this is -delta int J_g Omega cos(Omega t) dt.
template <PeriodicDrive D>
double cycle_work_approx(const KernelTable &k, const D &d) {
    require(k.J_g.size() == k.t.size(), "cycle_work_approx needs the J_g column");
    return -detail::cycle_integral(k.t, k.J_g, d);
}

/// First-order-in-delta closed form at zero temperature,
///     W = (delta/2pi) int G_0(w) 2pi/(w+)^2 [sinc(2pi(w+ + Omega)/Omega)
///                                           + sinc(2pi(w+ - Omega)/Omega)] dw,
/// w+ = w + omega_a, sinc(x) = sin(x)/x. Defined for T = 0 only. Sets
/// `*warning` when delta/Omega > 0.2, where the expansion is unreliable.
inline double cycle_work_closed_form(const BathSpec &b, const DriveSpec &d, const KernelOptions &opt = {},
                                     std::string *warning = nullptr) {
    validate(b);
    validate(d);
    require(b.zero_temperature(), "closed-form cycle work is defined at T = 0 (beta = inf) only");
    require(d.phase == 0.0, "closed-form cycle work assumes a drive without phase offset");
    if (warning) {
        warning->clear();
        if (std::abs(d.delta / d.Omega) > 0.2) *warning = "delta/Omega > 0.2: weak-modulation closed form unreliable";
    }
    if (b.eta == 0.0 || d.delta == 0.0) return 0.0;
    const double two_pi = 2.0 * std::numbers::pi;
    auto f = [&](double w) {
        const double wp = w + d.omega_a;
        return response_zero_T(b, w) * two_pi / (wp * wp) *
               (detail::sinc(two_pi * (wp + d.Omega) / d.Omega) + detail::sinc(two_pi * (wp - d.Omega) / d.Omega));
    };
    double total = 0.0;
    for (const FrequencyInterval &iv : response_support(b, opt.cutoffs)) {
        std::vector<double> br{iv.lo};
        for (double p : {b.omega0 - 5 * b.width(), b.omega0, b.omega0 + 5 * b.width(), d.Omega - d.omega_a}) {
            if (p > iv.lo && p < iv.hi) br.push_back(p);
        }
        br.push_back(iv.hi);
        std::sort(br.begin(), br.end());
        total += integrate_adaptive(f, std::span<const double>(br), opt.quadrature).value;
    }
    return d.delta / two_pi * total;
}

struct SelectiveWork {
    double W_e = 0.0;    // work after outcome e, qubit starting in |e>
    double W_g = 0.0;    // work after outcome g, qubit starting in |g>
    double W_sel = 0.0;  // p_e W_e + (1 - p_e) W_g
};

/// Outcome-resolved cycle work. After outcome j the qubit starts in |j> and
/// the piston runs drive d_j; k_j is the kernel table computed for d_j.
///     W_sel = oint [p_e J_e wdot_e - (1 - p_e) J_g wdot_g] dt.
template <PeriodicDrive D>
SelectiveWork selective_cycle_work(const KernelTable &k_e, const KernelTable &k_g, const D &d_e, const D &d_g,
                                   double p_e) {
    require(p_e >= 0.0 && p_e <= 1.0, "p_e must lie in [0, 1]");
    if (std::abs(period(d_e) - period(d_g)) > 1e-12 * period(d_g)) {
        throw ConfigError("selective drives must share the cycle period");
    }
    SelectiveWork w;
    w.W_e = detail::cycle_integral(k_e.t, k_e.J_e, d_e);
    w.W_g = -detail::cycle_integral(k_g.t, k_g.J_g, d_g);
    w.W_sel = p_e * w.W_e + (1.0 - p_e) * w.W_g;
    return w;
}

/// Non-selective counterpart with one shared drive:
///     W = -oint [J_g (1 - p_e) - J_e p_e] wdot dt.
template <PeriodicDrive D>
double nsm_cycle_work(const KernelTable &k, const D &d, double p_e) {
    require(p_e >= 0.0 && p_e <= 1.0, "p_e must lie in [0, 1]");
    std::vector<double> mix(k.t.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = k.J_g[i] * (1.0 - p_e) - k.J_e[i] * p_e;
    return -detail::cycle_integral(k.t, mix, d);
}

/// Binary entropy in nats, -p ln p - (1-p) ln(1-p).
inline double binary_entropy(double p) {
    require(p >= 0.0 && p <= 1.0, "probability must lie in [0, 1]");
    auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
    return term(p) + term(1.0 - p);
}

/// Work bounds after a measurement of cost dE_meas and entropy dS_meas:
///     W_nsm_max = dE_meas - T dS_meas
///     W_SL      = T H(p_e)
///     W_sel_max = W_nsm_max + W_SL
inline WorkLedger bounds(double dE_meas, double dS_meas, double T, double p_e) {
    require(dS_meas >= 0.0, "measurement entropy change must be >= 0");
    require(T >= 0.0, "temperature must be >= 0");
    WorkLedger w;
    w.dE_meas = dE_meas;
    w.dS_meas = dS_meas;
    w.W_nsm_max = dE_meas - T * dS_meas;
    w.W_SL = T * binary_entropy(p_e);
    w.W_sel_max = *w.W_nsm_max + *w.W_SL;
    return w;
}

/// Three-stroke reversible cycle after the measurement: (1) measurement,
/// (2) sudden switch to the Hamiltonian H' whose Gibbs state is the
/// post-measurement state, (3) isothermal return to the original
/// Hamiltonian. E_stab = <H'> in the post-measurement state.
inline WorkLedger optimal_cycle_ledger(double E_before, double E_after_meas, double S_before, double S_after_meas,
                                       double E_stab, double T) {
    require(T >= 0.0, "temperature must be >= 0");
    WorkLedger w;
    const double dE = E_after_meas - E_before;
    const double dS = S_after_meas - S_before;
    w.dE_meas = dE;
    w.dS_meas = dS;
    const double w_sudden = E_after_meas - E_stab;
    const double w_isotherm = -(E_before - E_stab) + T * (-dS);
    w.strokes.push_back({"measurement", -dE, dE, dS});
    w.strokes.push_back({"sudden_stabilization", w_sudden, -w_sudden, 0.0});
    w.strokes.push_back({"isothermal_return", w_isotherm, E_before - E_stab, -dS});
    w.W_nsm_max = w_sudden + w_isotherm;
    return w;
}

}  // namespace qndwork
