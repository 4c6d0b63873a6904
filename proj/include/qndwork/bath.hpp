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
#include <limits>
#include <sstream>
#include <vector>

#include "qndwork/error.hpp"

namespace qndwork {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Lorentzian bath coupling spectrum. Natural units, hbar = k_B = 1.
///
/// The zero-temperature response is
///     G_0(w) = eta^2 (1/tc) / ((w - omega0)^2 + tc^-2)   for w >= 0,
/// and vanishes for w < 0. `eta` is kept inside G, so the golden-rule decay
/// rate of a qubit at frequency w is G_T(w).
struct BathSpec {
    double eta = 0.0;
    double omega0 = 1.0;
    double tc = 1.0;
    double beta = kInfinity;

    bool zero_temperature() const noexcept {
        return std::isinf(beta);
    }
    double temperature() const noexcept {
        return zero_temperature() ? 0.0 : 1.0 / beta;
    }
    double width() const noexcept {
        return 1.0 / tc;
    }
};

inline void validate(const BathSpec &b) {
    require(std::isfinite(b.eta) && b.eta >= 0.0, "bath.eta must be finite and >= 0");
    require(std::isfinite(b.omega0) && b.omega0 > 0.0, "bath.omega0 must be > 0");
    require(std::isfinite(b.tc) && b.tc > 0.0, "bath.tc must be > 0");
    require(b.beta > 0.0 && !std::isnan(b.beta), "bath.beta must be > 0 or +inf");
}

/// Frequency truncation used by every integral over G_T.
///
/// Each Lorentzian lobe (at +omega0, and at -omega0 for the thermal
/// absorption branch) is integrated over |w -+ omega0| <= span_widths / tc.
/// Frequencies with |w| < infrared_floor_widths / tc are dropped: with a
/// hard cutoff at w = 0 the Bose factor makes G_T diverge like 1/|w| there
/// and the frequency integrals would diverge logarithmically.
struct SpectralCutoffs {
    double span_widths = 40.0;
    double infrared_floor_widths = 1.0;
};

inline double response_zero_T(const BathSpec &b, double omega) noexcept {
    if (omega < 0.0) {
        return 0.0;
    }
    const double gamma = 1.0 / b.tc;
    const double x = omega - b.omega0;
    return b.eta * b.eta * gamma / (x * x + gamma * gamma);
}

/// Mean Bose occupation 1/(exp(beta w) - 1) for w > 0.
inline double bose_occupation(double beta, double omega) noexcept {
    if (std::isinf(beta)) {
        return 0.0;
    }
    return 1.0 / std::expm1(beta * omega);
}

/// Thermal response obeying G_T(-w) = exp(-beta w) G_T(w).
///
/// Built as (1 + n(w)) G_0(w) + n(-w) G_0(-w). At w = 0 with finite beta
/// the limit is +inf unless G_0(0) = 0; that case throws.
inline double response_finite_T(const BathSpec &b, double omega) {
    if (b.zero_temperature()) {
        return response_zero_T(b, omega);
    }
    if (omega == 0.0) {
        const double g0 = response_zero_T(b, 0.0);
        if (g0 == 0.0) {
            return 0.0;
        }
        std::ostringstream msg;
        msg << "G_T(0) is not finite at beta=" << b.beta << " (G_0(0)=" << g0 << ")";
        throw NumericalError(msg.str());
    }
    if (omega > 0.0) {
        return response_zero_T(b, omega) / -std::expm1(-b.beta * omega);
    }
    return response_zero_T(b, -omega) / std::expm1(-b.beta * omega);
}

/// Alias used by integrands: G_T including the zero-temperature case.
inline double response(const BathSpec &b, double omega) {
    return response_finite_T(b, omega);
}

/// A closed frequency interval [lo, hi].
struct FrequencyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Support of G_T after truncation, as disjoint intervals in increasing
/// order. The negative-frequency lobe is present only at finite temperature.
inline std::vector<FrequencyInterval> response_support(const BathSpec &b, const SpectralCutoffs &cut = {}) {
    const double half = cut.span_widths / b.tc;
    const double floor = cut.infrared_floor_widths / b.tc;
    const double lo = std::max(floor, b.omega0 - half);
    const double hi = b.omega0 + half;
    std::vector<FrequencyInterval> out;
    if (hi <= lo || b.eta == 0.0) {
        return out;
    }
    if (!b.zero_temperature()) {
        out.push_back({-hi, -lo});
    }
    out.push_back({lo, hi});
    return out;
}

}  // namespace qndwork
