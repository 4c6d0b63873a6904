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

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "json.hpp"
#include "qndwork/bath.hpp"
#include "qndwork/error.hpp"
#include "qndwork/modulation.hpp"
#include "qndwork/parallel.hpp"
#include "qndwork/quadrature.hpp"

namespace qndwork::markovian {

/// Two-level Pauli dynamics with levels E_e(t), E_g(t) and rates R_e (e -> g),
/// R_g (g -> e). R_g is always derived from R_e through detailed balance,
///     R_g = R_e exp(-beta (E_e - E_g)).
template <class M>
concept RateModel = requires(const M &m, double t) {
    { m.E_e(t) } -> std::convertible_to<double>;
    { m.E_g(t) } -> std::convertible_to<double>;
    { m.dE_e(t) } -> std::convertible_to<double>;
    { m.dE_g(t) } -> std::convertible_to<double>;
    { m.R_e(t) } -> std::convertible_to<double>;
    { m.R_g(t) } -> std::convertible_to<double>;
    { m.beta() } -> std::convertible_to<double>;
    { m.period() } -> std::convertible_to<double>;
};

/// Instantaneous golden-rule rates of a qubit with splitting w(t):
/// R_e = G_T(w), R_g = G_T(-w), E_e = w/2, E_g = -w/2.
struct GoldenRuleModel {
    BathSpec bath;
    DriveSpec drive;

    double E_e(double t) const noexcept {
        return 0.5 * omega_of_t(drive, t);
    }
    double E_g(double t) const noexcept {
        return -0.5 * omega_of_t(drive, t);
    }
    double dE_e(double t) const noexcept {
        return 0.5 * omega_dot(drive, t);
    }
    double dE_g(double t) const noexcept {
        return -0.5 * omega_dot(drive, t);
    }
    double R_e(double t) const {
        return response(bath, omega_of_t(drive, t));
    }
    double R_g(double t) const {
        return response(bath, -omega_of_t(drive, t));
    }
    double beta() const noexcept {
        return bath.beta;
    }
    double period() const noexcept {
        return qndwork::period(drive);
    }
};

/// Truncated Fourier series c0 + sum_k [a_k cos(k W t) + b_k sin(k W t)].
struct FourierSeries {
    double c0 = 0.0;
    std::vector<double> a;
    std::vector<double> b;

    double value(double t, double W) const noexcept {
        double v = c0;
        for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * std::cos((k + 1) * W * t);
        for (std::size_t k = 0; k < b.size(); ++k) v += b[k] * std::sin((k + 1) * W * t);
        return v;
    }
    double derivative(double t, double W) const noexcept {
        double v = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) v -= a[k] * (k + 1) * W * std::sin((k + 1) * W * t);
        for (std::size_t k = 0; k < b.size(); ++k) v += b[k] * (k + 1) * W * std::cos((k + 1) * W * t);
        return v;
    }
};

/// Periodic levels and rates with R_e = exp(log_rate(t)) > 0.
struct PeriodicRateModel {
    double Omega = 1.0;
    double inverse_temperature = 1.0;
    FourierSeries level_e;
    FourierSeries level_g;
    FourierSeries log_rate;

    double E_e(double t) const noexcept {
        return level_e.value(t, Omega);
    }
    double E_g(double t) const noexcept {
        return level_g.value(t, Omega);
    }
    double dE_e(double t) const noexcept {
        return level_e.derivative(t, Omega);
    }
    double dE_g(double t) const noexcept {
        return level_g.derivative(t, Omega);
    }
    double R_e(double t) const noexcept {
        return std::exp(log_rate.value(t, Omega));
    }
    double R_g(double t) const {
        if (std::isinf(inverse_temperature)) {
            require(E_e(t) > E_g(t), "zero-temperature rates need E_e > E_g");
            return 0.0;
        }
        return R_e(t) * std::exp(-inverse_temperature * (E_e(t) - E_g(t)));
    }
    double beta() const noexcept {
        return inverse_temperature;
    }
    double period() const noexcept {
        return 2.0 * std::numbers::pi / Omega;
    }
};

/// Rates and levels sampled on a grid.
struct RateTrajectory {
    std::vector<double> t;
    std::vector<double> R_e;
    std::vector<double> R_g;
    std::vector<double> E_e;
    std::vector<double> E_g;
};

template <RateModel M>
RateTrajectory sample(const M &m, const std::vector<double> &t) {
    RateTrajectory r;
    r.t = t;
    for (double x : t) {
        r.R_e.push_back(m.R_e(x));
        r.R_g.push_back(m.R_g(x));
        r.E_e.push_back(m.E_e(x));
        r.E_g.push_back(m.E_g(x));
    }
    return r;
}

/// Gibbs population of the upper level at the instantaneous levels.
inline double equilibrium_excited(double beta, double E_e, double E_g) {
    if (std::isinf(beta)) return E_e > E_g ? 0.0 : (E_e < E_g ? 1.0 : 0.5);
    const double x = beta * (E_e - E_g);
    return x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

/// Largest relative mismatch |R_e p_e^eq - R_g p_g^eq| / max(...); throws
/// ConfigError above `tolerance` or on a negative rate.
inline double check_detailed_balance(const RateTrajectory &r, double beta, double tolerance = 1e-12) {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        if (r.R_e[i] < 0.0 || r.R_g[i] < 0.0) {
            throw ConfigError("negative rate at t = " + std::to_string(r.t[i]));
        }
        const double pe = equilibrium_excited(beta, r.E_e[i], r.E_g[i]);
        const double lhs = r.R_e[i] * pe;
        const double rhs = r.R_g[i] * (1.0 - pe);
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    if (worst > tolerance) {
        throw ConfigError("rates violate detailed balance (relative mismatch " + std::to_string(worst) + ")");
    }
    return worst;
}

struct EvolutionOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double initial_dt = 1e-3;
};

/// Populations on a grid, with the running extracted work
/// W(t) = -int (rho_ee dE_e + rho_gg dE_g) and Lambda(t) = int (R_e + R_g).
struct PopulationTrajectory {
    std::vector<double> t;
    std::vector<double> rho_ee;
    std::vector<double> work;
    std::vector<double> decay;

    double rho_gg(std::size_t i) const noexcept {
        return 1.0 - rho_ee[i];
    }
};

/// Integrates rho_ee' = R_g (1 - rho_ee) - R_e rho_ee with Dormand-Prince
/// dense output; only the difference variable is integrated, so
/// rho_ee + rho_gg = 1 exactly.
template <RateModel M>
PopulationTrajectory evolve_populations(const M &m, double rho_ee0, const std::vector<double> &t_grid,
                                        const EvolutionOptions &opt = {}) {
    namespace ode = boost::numeric::odeint;
    require(rho_ee0 >= 0.0 && rho_ee0 <= 1.0, "initial population must lie in [0, 1]");
    require(t_grid.size() >= 2 && std::is_sorted(t_grid.begin(), t_grid.end()), "time grid must be increasing");
    using State = std::array<double, 3>;
    auto rhs = [&m](const State &x, State &dx, double t) {
        const double re = m.R_e(t);
        const double rg = m.R_g(t);
        dx[0] = rg * (1.0 - x[0]) - re * x[0];
        dx[1] = -(x[0] * m.dE_e(t) + (1.0 - x[0]) * m.dE_g(t));
        dx[2] = re + rg;
    };
    PopulationTrajectory out;
    State x{rho_ee0, 0.0, 0.0};
    auto observer = [&out](const State &s, double t) {
        out.t.push_back(t);
        out.rho_ee.push_back(s[0]);
        out.work.push_back(s[1]);
        out.decay.push_back(s[2]);
    };
    try {
        auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
        ode::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), opt.initial_dt, observer);
    } catch (const ode::odeint_error &e) {
        throw NumericalError("population integration failed", e.what());
    }
    for (double &p : out.rho_ee) {
        if (p < -1e-10 || p > 1.0 + 1e-10) throw NumericalError("population left [0, 1]", std::to_string(p));
        p = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

struct EntropyReport {
    /// min over the grid of dS/dt - beta dQ/dt (>= 0 by the theorem).
    double min_production = 0.0;
    double t_at_min = 0.0;
    /// max over the grid of sum_j rho_j' (ln rho_j - ln rho_j^eq) (<= 0).
    double max_auxiliary = 0.0;
    /// Largest gap between the two forms of the auxiliary expression.
    double auxiliary_form_gap = 0.0;
    std::size_t violations = 0;
};

/// Pointwise entropy-production check along a trajectory.
template <RateModel M>
EntropyReport entropy_production_check(const M &m, const PopulationTrajectory &p, double tolerance = 1e-10) {
    EntropyReport rep;
    rep.min_production = kInfinity;
    rep.max_auxiliary = -kInfinity;
    const double beta = m.beta();
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        const double t = p.t[i];
        const double ree = p.rho_ee[i];
        const double rgg = 1.0 - ree;
        const double Re = m.R_e(t);
        const double Rg = m.R_g(t);
        const double flow = Rg * rgg - Re * ree;  // d rho_ee / dt
        if (ree <= 0.0 || rgg <= 0.0 || std::isinf(beta)) {
            // Pure states or T = 0: the logarithms are singular; only the
            // sign structure can be checked.
            continue;
        }
        const double Ee = m.E_e(t);
        const double Eg = m.E_g(t);
        const double pe = equilibrium_excited(beta, Ee, Eg);
        const double pg = 1.0 - pe;
        const double s_dot = -(flow * std::log(ree) - flow * std::log(rgg));
        const double q_dot = flow * Ee - flow * Eg;
        const double production = s_dot - beta * q_dot;
        if (production < rep.min_production) {
            rep.min_production = production;
            rep.t_at_min = t;
        }
        const double aux = flow * (std::log(ree) - std::log(pe)) - flow * (std::log(rgg) - std::log(pg));
        const double x = rgg / pg;
        const double y = ree / pe;
        const double aux_xy = Rg * pg * (x * std::log(y) - x * std::log(x) + x - y) +
                              Re * pe * (y * std::log(x) - y * std::log(y) + y - x);
        rep.max_auxiliary = std::max(rep.max_auxiliary, aux);
        rep.auxiliary_form_gap =
            std::max(rep.auxiliary_form_gap, std::abs(aux - aux_xy) / std::max(1.0, std::abs(aux)));
        if (production < -tolerance || aux > tolerance) ++rep.violations;
    }
    if (rep.min_production == kInfinity) rep.min_production = 0.0;
    if (rep.max_auxiliary == -kInfinity) rep.max_auxiliary = 0.0;
    return rep;
}

struct CycleReport {
    double W = 0.0;
    double max_entropy_violation = 0.0;
    double cycle_closure_error = 0.0;
    double rho_ee_start = 0.0;
    EntropyReport entropy;
};

inline void to_json(nlohmann::json &j, const CycleReport &r) {
    j = nlohmann::json{{"W", r.W},
                       {"max_entropy_violation", r.max_entropy_violation},
                       {"cycle_closure_error", r.cycle_closure_error}};
}

struct CycleOptions {
    EvolutionOptions evolution;
    std::size_t points_per_period = 400;
    double closure_tolerance = 1e-6;
    double entropy_tolerance = 1e-10;
};

/// Work over one period at the periodic steady state. The equation is
/// linear, rho(T) = exp(-Lambda) rho(0) + c, so one pass from rho = 0
/// gives the fixed point rho* = c / (1 - exp(-Lambda)); a second pass from
/// rho* yields W = -oint sum_j rho_jj dE_j and the closure error.
template <RateModel M>
CycleReport closed_cycle_work(const M &m, const CycleOptions &opt = {}) {
    require(opt.points_per_period >= 2, "points_per_period must be >= 2");
    const double T = m.period();
    const std::vector<double> grid = uniform_grid(0.0, T, opt.points_per_period);
    check_detailed_balance(sample(m, grid), m.beta());
    const PopulationTrajectory probe = evolve_populations(m, 0.0, grid, opt.evolution);
    const double lambda = probe.decay.back();
    if (!(lambda > 1e-14)) {
        throw NumericalError("no relaxation over the cycle: periodic steady state undefined",
                             "integrated rate=" + std::to_string(lambda));
    }
    const double x_star = probe.rho_ee.back() / -std::expm1(-lambda);
    const PopulationTrajectory p = evolve_populations(m, std::clamp(x_star, 0.0, 1.0), grid, opt.evolution);
    CycleReport r;
    r.rho_ee_start = p.rho_ee.front();
    r.W = p.work.back();
    r.cycle_closure_error = std::abs(p.rho_ee.back() - p.rho_ee.front());
    if (r.cycle_closure_error > opt.closure_tolerance) {
        throw NumericalError("cycle did not close", "closure_error=" + std::to_string(r.cycle_closure_error));
    }
    r.entropy = entropy_production_check(m, p, opt.entropy_tolerance);
    r.max_entropy_violation = std::max(0.0, -r.entropy.min_production);
    return r;
}

/// Random periodic model: up to three harmonics in each level and in the
/// log-rate, Omega in [0.2, 5], beta in [0.1, 10].
inline PeriodicRateModel random_rate_model(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double a, double b) { return a + (b - a) * unit(rng); };
    PeriodicRateModel m;
    m.Omega = in(0.2, 5.0);
    m.inverse_temperature = in(0.1, 10.0);
    const int harmonics = 1 + static_cast<int>(unit(rng) * 3.0);
    auto series = [&](double c0, double amp) {
        FourierSeries s;
        s.c0 = c0;
        for (int k = 0; k < harmonics; ++k) {
            s.a.push_back(in(-amp, amp) / (k + 1));
            s.b.push_back(in(-amp, amp) / (k + 1));
        }
        return s;
    };
    m.level_e = series(in(0.0, 2.0), 0.5);
    m.level_g = series(in(-2.0, 0.0), 0.5);
    m.log_rate = series(std::log(in(0.05, 5.0)), 1.0);
    return m;
}

struct CampaignReport {
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double max_W = -kInfinity;
    double max_entropy_violation = 0.0;
    double max_cycle_closure_error = 0.0;
    std::size_t work_violations = 0;
    std::size_t entropy_violations = 0;
    std::vector<CycleReport> cycles;

    bool passed() const noexcept {
        return work_violations == 0 && entropy_violations == 0;
    }
};

inline void to_json(nlohmann::json &j, const CampaignReport &r) {
    j = nlohmann::json{{"trials", r.trials},
                       {"seed", r.seed},
                       {"W", r.max_W},
                       {"max_entropy_violation", r.max_entropy_violation},
                       {"cycle_closure_error", r.max_cycle_closure_error},
                       {"work_violations", r.work_violations},
                       {"entropy_violations", r.entropy_violations},
                       {"passed", r.passed()},
                       {"cycles", r.cycles}};
}

/// Second-law campaign over `trials` random models. Trial i draws its model
/// from its own generator seeded with seed + i, so results do not depend on
/// the thread count.
inline CampaignReport second_law_campaign(std::size_t trials, std::uint64_t seed, unsigned threads = 1,
                                          const CycleOptions &opt = {}, double work_tolerance = 1e-8) {
    CampaignReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.cycles.resize(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        std::mt19937_64 rng(seed + i);
        rep.cycles[i] = closed_cycle_work(random_rate_model(rng), opt);
    });
    for (const CycleReport &c : rep.cycles) {
        rep.max_W = std::max(rep.max_W, c.W);
        rep.max_entropy_violation = std::max(rep.max_entropy_violation, c.max_entropy_violation);
        rep.max_cycle_closure_error = std::max(rep.max_cycle_closure_error, c.cycle_closure_error);
        if (c.W > work_tolerance) ++rep.work_violations;
        if (c.entropy.violations > 0) ++rep.entropy_violations;
    }
    if (trials == 0) rep.max_W = 0.0;
    return rep;
}

}  // namespace qndwork::markovian
