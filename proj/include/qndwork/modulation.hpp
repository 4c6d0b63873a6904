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
#include <complex>
#include <concepts>
#include <numbers>
#include <sstream>
#include <vector>

#include "qndwork/error.hpp"

namespace qndwork {

using cplx = std::complex<double>;

/// Sinusoidal piston drive of the qubit splitting,
///     w(t) = omega_a + delta sin(Omega (t - t_start) + phase).
/// The cycle starts at t_start (the measurement time).
struct DriveSpec {
    double omega_a = 1.0;
    double delta = 0.0;
    double Omega = 1.0;
    double t_start = 0.0;
    double phase = 0.0;
};

/// One term c_n exp(i n Omega tau) of a periodic envelope expansion.
struct Sideband {
    int n = 0;
    cplx weight;
};

inline void validate(const DriveSpec &d) {
    require(std::isfinite(d.omega_a) && d.omega_a > 0.0, "drive.omega_a must be > 0");
    require(std::isfinite(d.Omega) && d.Omega > 0.0, "drive.Omega must be > 0");
    require(std::isfinite(d.delta) && std::abs(d.delta) < d.omega_a, "drive.delta must satisfy |delta| < omega_a");
    require(std::isfinite(d.t_start) && std::isfinite(d.phase), "drive.t_start and drive.phase must be finite");
}

inline double period(const DriveSpec &d) noexcept {
    return 2.0 * std::numbers::pi / d.Omega;
}
inline double carrier(const DriveSpec &d) noexcept {
    return d.omega_a;
}
inline double rate(const DriveSpec &d) noexcept {
    return d.Omega;
}

inline double omega_of_t(const DriveSpec &d, double t) noexcept {
    return d.omega_a + d.delta * std::sin(d.Omega * (t - d.t_start) + d.phase);
}

inline double omega_dot(const DriveSpec &d, double t) noexcept {
    return d.delta * d.Omega * std::cos(d.Omega * (t - d.t_start) + d.phase);
}

/// Integral of w from t_start to t.
inline double accumulated_phase(const DriveSpec &d, double t) noexcept {
    const double tau = t - d.t_start;
    return d.omega_a * tau + (d.delta / d.Omega) * (std::cos(d.phase) - std::cos(d.Omega * tau + d.phase));
}

/// eps(t) = exp(i * integral_{t_start}^{t} w).
inline cplx phase_factor(const DriveSpec &d, double t) noexcept {
    return std::polar(1.0, accumulated_phase(d, t));
}

namespace detail {

/// J_n(x) for any integer n and real x.
inline double bessel_j(int n, double x) {
    double sign = 1.0;
    if (n < 0) {
        n = -n;
        if (n % 2) sign = -sign;
    }
    if (x < 0.0) {
        x = -x;
        if (n % 2) sign = -sign;
    }
    return sign * std::cyl_bessel_j(static_cast<double>(n), x);
}

inline cplx i_pow(int n) noexcept {
    switch (((n % 4) + 4) % 4) {
        case 0:
            return {1.0, 0.0};
        case 1:
            return {0.0, 1.0};
        case 2:
            return {-1.0, 0.0};
        default:
            return {0.0, -1.0};
    }
}

/// Upper bound on sum_{|n| > n_max} |J_n(x)|.
inline double bessel_tail(int n_max, double x) {
    double tail = 0.0;
    for (int n = n_max + 1;; ++n) {
        const double term = std::abs(bessel_j(n, x));
        tail += 2.0 * term;
        if (n > std::abs(x) + 2 && term < 1e-18) break;
        if (n > n_max + 400) break;
    }
    return tail;
}

}  // namespace detail

/// Bessel weights i^n J_n(-delta/Omega) for n in [-n_max, n_max], so that
///     exp(-i (delta/Omega) cos(Omega t)) = sum_n weight_n exp(i n Omega t).
/// Throws NumericalError when the discarded tail exceeds `tolerance`.
inline std::vector<Sideband> sideband_weights(const DriveSpec &d, int n_max, double tolerance = 1e-10) {
    require(n_max >= 0, "sideband order must be >= 0");
    const double x = -d.delta / d.Omega;
    const double tail = detail::bessel_tail(n_max, x);
    if (tail > tolerance) {
        std::ostringstream diag;
        diag << "n_max=" << n_max << " delta/Omega=" << -x << " tail=" << tail;
        throw NumericalError("sideband order too small for reconstruction tolerance", diag.str());
    }
    std::vector<Sideband> out;
    out.reserve(2 * n_max + 1);
    for (int n = -n_max; n <= n_max; ++n) {
        out.push_back({n, detail::i_pow(n) * detail::bessel_j(n, x)});
    }
    return out;
}

/// Smallest order whose Bessel tail is below `tolerance`.
inline int sideband_order(double modulation_index, double tolerance = 1e-10) {
    int n = 0;
    while (detail::bessel_tail(n, modulation_index) > tolerance) {
        ++n;
    }
    return n;
}

/// Expansion of the slow envelope P(tau) = eps(t_start + tau) exp(-i omega_a tau)
/// as sum_n c_n exp(i n Omega tau). Includes the drive phase and the
/// constant that makes P(0) = 1.
inline std::vector<Sideband> envelope_sidebands(const DriveSpec &d, double tolerance = 1e-12) {
    const double index = d.delta / d.Omega;
    const int n_max = sideband_order(index, tolerance);
    const cplx offset = std::polar(1.0, index * std::cos(d.phase));
    std::vector<Sideband> out;
    for (const Sideband &s : sideband_weights(d, n_max, tolerance)) {
        out.push_back({s.n, s.weight * offset * std::polar(1.0, s.n * d.phase)});
    }
    return out;
}

/// General periodic drive given by its harmonics,
///     w(t) = omega_a + sum_k [a_k cos(k Omega tau) + b_k sin(k Omega tau)],
/// tau = t - t_start, k = 1..K.
struct HarmonicDrive {
    double omega_a = 1.0;
    double Omega = 1.0;
    double t_start = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
};

inline double period(const HarmonicDrive &d) noexcept {
    return 2.0 * std::numbers::pi / d.Omega;
}
inline double carrier(const HarmonicDrive &d) noexcept {
    return d.omega_a;
}
inline double rate(const HarmonicDrive &d) noexcept {
    return d.Omega;
}

inline double omega_of_t(const HarmonicDrive &d, double t) noexcept {
    const double tau = t - d.t_start;
    double w = d.omega_a;
    for (std::size_t k = 0; k < d.cos_coeffs.size(); ++k) w += d.cos_coeffs[k] * std::cos((k + 1) * d.Omega * tau);
    for (std::size_t k = 0; k < d.sin_coeffs.size(); ++k) w += d.sin_coeffs[k] * std::sin((k + 1) * d.Omega * tau);
    return w;
}

inline double omega_dot(const HarmonicDrive &d, double t) noexcept {
    const double tau = t - d.t_start;
    double w = 0.0;
    for (std::size_t k = 0; k < d.cos_coeffs.size(); ++k) {
        const double f = (k + 1) * d.Omega;
        w -= d.cos_coeffs[k] * f * std::sin(f * tau);
    }
    for (std::size_t k = 0; k < d.sin_coeffs.size(); ++k) {
        const double f = (k + 1) * d.Omega;
        w += d.sin_coeffs[k] * f * std::cos(f * tau);
    }
    return w;
}

inline double accumulated_phase(const HarmonicDrive &d, double t) noexcept {
    const double tau = t - d.t_start;
    double p = d.omega_a * tau;
    for (std::size_t k = 0; k < d.cos_coeffs.size(); ++k) {
        const double f = (k + 1) * d.Omega;
        p += d.cos_coeffs[k] / f * std::sin(f * tau);
    }
    for (std::size_t k = 0; k < d.sin_coeffs.size(); ++k) {
        const double f = (k + 1) * d.Omega;
        p += d.sin_coeffs[k] / f * (1.0 - std::cos(f * tau));
    }
    return p;
}

inline cplx phase_factor(const HarmonicDrive &d, double t) noexcept {
    return std::polar(1.0, accumulated_phase(d, t));
}

inline void validate(const HarmonicDrive &d) {
    require(std::isfinite(d.omega_a) && d.omega_a > 0.0, "drive.omega_a must be > 0");
    require(std::isfinite(d.Omega) && d.Omega > 0.0, "drive.Omega must be > 0");
    double amplitude = 0.0;
    for (double a : d.cos_coeffs) amplitude += std::abs(a);
    for (double b : d.sin_coeffs) amplitude += std::abs(b);
    require(amplitude < d.omega_a, "harmonic drive amplitude must stay below omega_a");
}

/// Envelope expansion by discrete Fourier transform of P on a uniform
/// grid. The grid is doubled until the coefficients outside the retained
/// band fall below `tolerance`.
inline std::vector<Sideband> envelope_sidebands(const HarmonicDrive &d, double tolerance = 1e-12) {
    const double T = period(d);
    for (int m = 64; m <= (1 << 16); m *= 2) {
        std::vector<cplx> samples(m);
        for (int j = 0; j < m; ++j) {
            const double tau = T * j / m;
            samples[j] = std::polar(1.0, accumulated_phase(d, d.t_start + tau) - d.omega_a * tau);
        }
        const int band = m / 4;
        std::vector<Sideband> out;
        double outside = 0.0;
        for (int n = -m / 2; n < m / 2; ++n) {
            cplx c = 0.0;
            for (int j = 0; j < m; ++j) {
                c += samples[j] * std::polar(1.0, -2.0 * std::numbers::pi * n * j / m);
            }
            c /= static_cast<double>(m);
            if (std::abs(n) <= band) {
                if (std::abs(c) > tolerance * 1e-3) out.push_back({n, c});
            } else {
                outside += std::abs(c);
            }
        }
        if (outside < tolerance) {
            return out;
        }
    }
    throw NumericalError("harmonic drive envelope did not converge");
}

/// Anything that can modulate the qubit splitting periodically.
template <class D>
concept PeriodicDrive = requires(const D &d, double t) {
    { omega_of_t(d, t) } -> std::convertible_to<double>;
    { omega_dot(d, t) } -> std::convertible_to<double>;
    { accumulated_phase(d, t) } -> std::convertible_to<double>;
    { period(d) } -> std::convertible_to<double>;
    { carrier(d) } -> std::convertible_to<double>;
    { rate(d) } -> std::convertible_to<double>;
    { envelope_sidebands(d, t) } -> std::convertible_to<std::vector<Sideband>>;
    { d.t_start } -> std::convertible_to<double>;
};

}  // namespace qndwork
