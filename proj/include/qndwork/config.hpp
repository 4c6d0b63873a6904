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

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qndwork/bath.hpp"
#include "qndwork/error.hpp"
#include "qndwork/exactsim/model.hpp"
#include "qndwork/kernels.hpp"
#include "qndwork/modulation.hpp"
#include "qndwork/quadrature.hpp"

namespace qndwork {

struct KernelSettings {
    std::size_t points_per_period = 2000;
    std::size_t periods = 1;
    /// s(0); empty means the Gibbs value -tanh(beta omega_a / 2)/2.
    std::optional<double> initial_polarization;
    PolarizationForm form = PolarizationForm::exponential;
};

struct ExactSettings {
    exactsim::Discretization discretization;
    double dt_max = 0.1;
    bool include_probe = false;
    /// Probe state (I + d sz)/2.
    double probe_polarization = 0.0;
    exactsim::PulseSpec pulse;
    bool pulse_time_given = false;
    /// End of the run; empty means one drive period after drive.t_start.
    std::optional<double> t_end;
    bool convergence = true;
    std::optional<int> convergence_max_excitations = 3;
    double audit_tolerance = 1e-8;
};

enum class SweepVariable { Omega, t_cycle, T, beta, delta };

struct SweepSettings {
    SweepVariable variable = SweepVariable::Omega;
    std::vector<double> values;
};

struct Tolerances {
    QuadratureOptions quadrature;
    SpectralCutoffs cutoffs;
    double sideband = 1e-12;
    double propagation = 1e-8;
    double derivative = 1e-3;
};

struct MarkovianSettings {
    enum class Mode { campaign, golden_rule } mode = Mode::campaign;
    std::size_t trials = 100;
    std::size_t points_per_period = 400;
};

struct ScenarioConfig {
    BathSpec bath;
    DriveSpec drive;
    KernelSettings kernels;
    ExactSettings exact;
    std::optional<SweepSettings> sweep;
    Tolerances tolerances;
    MarkovianSettings markovian;
    std::uint64_t seed = 1;
};

namespace detail {

/// Reads keys from one JSON object and rejects any key left unread.
class Section {
   public:
    Section(const nlohmann::json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    bool has(const std::string &key) const {
        return j_.contains(key);
    }

    const nlohmann::json &raw(const std::string &key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string &key) {
        if (!has(key)) throw ConfigError("missing required key " + where(key));
        return to_number(raw(key), key);
    }
    double number(const std::string &key, double fallback) {
        return has(key) ? to_number(raw(key), key) : fallback;
    }

    /// A positive number or the string "inf".
    double number_or_inf(const std::string &key) {
        if (!has(key)) throw ConfigError("missing required key " + where(key));
        const nlohmann::json &v = raw(key);
        if (v.is_string()) {
            if (v.get<std::string>() == "inf") return kInfinity;
            throw ConfigError(where(key) + " must be a number or \"inf\"");
        }
        return to_number(v, key);
    }

    long long integer(const std::string &key, long long fallback) {
        if (!has(key)) return fallback;
        const nlohmann::json &v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
        return v.get<long long>();
    }

    bool boolean(const std::string &key, bool fallback) {
        if (!has(key)) return fallback;
        const nlohmann::json &v = raw(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string string(const std::string &key, const std::string &fallback) {
        if (!has(key)) return fallback;
        const nlohmann::json &v = raw(key);
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
        return v.get<std::string>();
    }

    Section child(const std::string &key) {
        if (!has(key)) throw ConfigError("missing required section " + where(key));
        return Section(raw(key), where(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
        }
    }

    std::string where(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

   private:
    double to_number(const nlohmann::json &v, const std::string &key) const {
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        return v.get<double>();
    }

    const nlohmann::json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::size_t positive_count(Section &s, const std::string &key, long long fallback) {
    const long long v = s.integer(key, fallback);
    if (v < 1) throw ConfigError(s.where(key) + " must be >= 1");
    return static_cast<std::size_t>(v);
}

inline SweepVariable parse_sweep_variable(const std::string &name) {
    if (name == "Omega") return SweepVariable::Omega;
    if (name == "t_cycle") return SweepVariable::t_cycle;
    if (name == "T") return SweepVariable::T;
    if (name == "beta") return SweepVariable::beta;
    if (name == "delta") return SweepVariable::delta;
    throw ConfigError("sweep.variable must be one of Omega, t_cycle, T, beta, delta (got \"" + name + "\")");
}

}  // namespace detail

inline std::string to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::Omega: return "Omega";
        case SweepVariable::t_cycle: return "t_cycle";
        case SweepVariable::T: return "T";
        case SweepVariable::beta: return "beta";
        case SweepVariable::delta: return "delta";
    }
    return "?";
}

/// Strict parse: physical parameters are required, unknown keys are
/// rejected, and every module-level invariant is checked before returning.
inline ScenarioConfig parse_config(const nlohmann::json &j) {
    using detail::Section;
    ScenarioConfig c;
    Section root(j, "");

    {
        Section b = root.child("bath");
        c.bath.eta = b.number("eta");
        c.bath.omega0 = b.number("omega0");
        c.bath.tc = b.number("tc");
        c.bath.beta = b.number_or_inf("beta");
        b.finish();
        validate(c.bath);
    }
    {
        Section d = root.child("drive");
        c.drive.omega_a = d.number("omega_a");
        c.drive.delta = d.number("delta");
        c.drive.Omega = d.number("Omega");
        c.drive.t_start = d.number("t_start");
        c.drive.phase = d.number("phase", 0.0);
        d.finish();
        validate(c.drive);
    }
    if (root.has("kernels")) {
        Section k = root.child("kernels");
        c.kernels.points_per_period = detail::positive_count(k, "points_per_period", 2000);
        c.kernels.periods = detail::positive_count(k, "periods", 1);
        if (k.has("initial_polarization")) {
            const nlohmann::json &v = k.raw("initial_polarization");
            if (v.is_string() && v.get<std::string>() == "equilibrium") {
                c.kernels.initial_polarization.reset();
            } else if (v.is_number()) {
                const double s0 = v.get<double>();
                require(s0 >= -0.5 && s0 <= 0.5, "kernels.initial_polarization must lie in [-1/2, 1/2]");
                c.kernels.initial_polarization = s0;
            } else {
                throw ConfigError("kernels.initial_polarization must be a number or \"equilibrium\"");
            }
        }
        const std::string form = k.string("form", "exponential");
        if (form == "exponential") {
            c.kernels.form = PolarizationForm::exponential;
        } else if (form == "expansion") {
            c.kernels.form = PolarizationForm::expansion;
        } else {
            throw ConfigError("kernels.form must be \"exponential\" or \"expansion\"");
        }
        k.finish();
        require(c.kernels.points_per_period >= 8, "kernels.points_per_period must be >= 8");
    }
    if (root.has("exact")) {
        Section e = root.child("exact");
        auto &disc = c.exact.discretization;
        disc.n_modes = static_cast<int>(detail::positive_count(e, "n_modes", 5));
        disc.fock_cutoff = static_cast<int>(detail::positive_count(e, "fock_cutoff", 2));
        disc.span_widths = e.number("span", 4.0);
        require(disc.span_widths > 0.0, "exact.span must be > 0");
        if (e.has("max_excitations")) disc.max_excitations = static_cast<int>(detail::positive_count(e, "max_excitations", 1));
        disc.dimension_cap = detail::positive_count(e, "dimension_cap", 4096);
        c.exact.dt_max = e.number("dt_max", 0.1);
        require(c.exact.dt_max > 0.0, "exact.dt_max must be > 0");
        c.exact.include_probe = e.boolean("include_probe", false);
        c.exact.probe_polarization = e.number("probe_polarization", 0.0);
        require(c.exact.probe_polarization >= -1.0 && c.exact.probe_polarization <= 1.0,
                "exact.probe_polarization must lie in [-1, 1]");
        if (e.has("pulse")) {
            Section p = e.child("pulse");
            c.exact.pulse.instantaneous = p.boolean("instantaneous", true);
            c.exact.pulse.tau_m = p.number("tau_m", 1e-3);
            if (p.has("t_m")) {
                c.exact.pulse.t_m = p.number("t_m");
                c.exact.pulse_time_given = true;
            }
            p.finish();
            require(c.exact.pulse.tau_m > 0.0, "exact.pulse.tau_m must be > 0");
        }
        if (e.has("t_end")) c.exact.t_end = e.number("t_end");
        c.exact.convergence = e.boolean("convergence", true);
        if (e.has("convergence_max_excitations")) {
            const nlohmann::json &v = e.raw("convergence_max_excitations");
            if (v.is_null()) {
                c.exact.convergence_max_excitations.reset();
            } else if (v.is_number_integer() && v.get<long long>() >= 1) {
                c.exact.convergence_max_excitations = v.get<int>();
            } else {
                throw ConfigError("exact.convergence_max_excitations must be a positive integer or null");
            }
        }
        c.exact.audit_tolerance = e.number("audit_tolerance", 1e-8);
        e.finish();
    }
    if (!c.exact.pulse_time_given) c.exact.pulse.t_m = c.drive.t_start;
    if (c.exact.t_end) {
        require(*c.exact.t_end > c.drive.t_start, "exact.t_end must be later than drive.t_start");
    }
    if (root.has("sweep")) {
        Section s = root.child("sweep");
        SweepSettings sw;
        if (!s.has("variable")) throw ConfigError("missing required key sweep.variable");
        sw.variable = detail::parse_sweep_variable(s.string("variable", ""));
        if (s.has("values")) {
            const nlohmann::json &v = s.raw("values");
            if (!v.is_array()) throw ConfigError("sweep.values must be an array");
            for (const auto &x : v) {
                if (!x.is_number()) throw ConfigError("sweep.values must hold numbers");
                sw.values.push_back(x.get<double>());
            }
            if (s.has("from") || s.has("to") || s.has("points")) {
                throw ConfigError("sweep takes either values or from/to/points, not both");
            }
        } else {
            const double from = s.number("from");
            const double to = s.number("to");
            const long long points = s.integer("points", -1);
            if (points < 0) throw ConfigError("sweep.points must be given as a non-negative integer");
            for (long long i = 0; i < points; ++i) {
                sw.values.push_back(points == 1 ? from : from + (to - from) * static_cast<double>(i) / (points - 1));
            }
        }
        s.finish();
        std::sort(sw.values.begin(), sw.values.end());
        for (double v : sw.values) {
            require(std::isfinite(v), "sweep values must be finite");
            switch (sw.variable) {
                case SweepVariable::Omega:
                case SweepVariable::t_cycle:
                case SweepVariable::beta: require(v > 0.0, "sweep values for " + to_string(sw.variable) + " must be > 0"); break;
                case SweepVariable::T: require(v >= 0.0, "sweep values for T must be >= 0"); break;
                case SweepVariable::delta:
                    require(std::abs(v) < c.drive.omega_a, "sweep values for delta must satisfy |delta| < omega_a");
                    break;
            }
        }
        c.sweep = std::move(sw);
    }
    if (root.has("tolerances")) {
        Section t = root.child("tolerances");
        c.tolerances.quadrature.abs_tol = t.number("quadrature_abs", c.tolerances.quadrature.abs_tol);
        c.tolerances.quadrature.rel_tol = t.number("quadrature_rel", c.tolerances.quadrature.rel_tol);
        c.tolerances.quadrature.max_intervals =
            static_cast<int>(detail::positive_count(t, "max_intervals", c.tolerances.quadrature.max_intervals));
        c.tolerances.cutoffs.span_widths = t.number("span_widths", c.tolerances.cutoffs.span_widths);
        c.tolerances.cutoffs.infrared_floor_widths =
            t.number("infrared_floor_widths", c.tolerances.cutoffs.infrared_floor_widths);
        c.tolerances.sideband = t.number("sideband", c.tolerances.sideband);
        c.tolerances.propagation = t.number("propagation", c.tolerances.propagation);
        c.tolerances.derivative = t.number("derivative", c.tolerances.derivative);
        t.finish();
        require(c.tolerances.quadrature.abs_tol > 0.0 && c.tolerances.quadrature.rel_tol >= 0.0,
                "quadrature tolerances must be positive");
        require(c.tolerances.cutoffs.span_widths > 0.0 && c.tolerances.cutoffs.infrared_floor_widths >= 0.0,
                "spectral cutoffs must be non-negative");
        require(c.tolerances.sideband > 0.0 && c.tolerances.propagation > 0.0 && c.tolerances.derivative > 0.0,
                "tolerances must be > 0");
    }
    if (root.has("markovian")) {
        Section m = root.child("markovian");
        const std::string mode = m.string("mode", "campaign");
        if (mode == "campaign") {
            c.markovian.mode = MarkovianSettings::Mode::campaign;
        } else if (mode == "golden_rule") {
            c.markovian.mode = MarkovianSettings::Mode::golden_rule;
        } else {
            throw ConfigError("markovian.mode must be \"campaign\" or \"golden_rule\"");
        }
        const long long trials = m.integer("trials", 100);
        if (trials < 0) throw ConfigError("markovian.trials must be >= 0");
        c.markovian.trials = static_cast<std::size_t>(trials);
        c.markovian.points_per_period = detail::positive_count(m, "points_per_period", 400);
        m.finish();
    }
    if (root.has("seed")) {
        const nlohmann::json &v = root.raw("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError("seed must be a non-negative integer");
        }
        c.seed = v.get<std::uint64_t>();
    }
    root.finish();
    return c;
}

inline ScenarioConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, false);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace qndwork
