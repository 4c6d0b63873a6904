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
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "qndwork/bath.hpp"
#include "qndwork/modulation.hpp"
#include "qndwork/parallel.hpp"
#include "qndwork/quadrature.hpp"

namespace qndwork {

/// Relaxation integrals and polarization sampled on a shared time grid.
/// Times are measured from the start of the cycle (the measurement), so
/// t[0] = 0 and J_e(0) = J_g(0) = dJ(0) = 0.
///
/// J_e integrates the downward rate R_e (|e> -> |g>), J_g the upward rate
/// R_g. dJ = (J_g - J_e) / 2 and s = (rho_ee - rho_gg) / 2.
struct KernelTable {
    std::vector<double> t;
    std::vector<double> J_e;
    std::vector<double> J_g;
    std::vector<double> dJ;
    std::vector<double> s;

    std::size_t size() const noexcept {
        return t.size();
    }
    bool has_polarization() const noexcept {
        return s.size() == t.size() && !t.empty();
    }
};

struct KernelOptions {
    QuadratureOptions quadrature{};
    SpectralCutoffs cutoffs{};
    double sideband_tolerance = 1e-12;
    std::size_t points_per_period = 2000;
    double periods = 1.0;
    unsigned threads = 1;
};

/// Uniform table grid covering `opt.periods` drive periods from 0.
template <PeriodicDrive D>
std::vector<double> kernel_grid(const D &d, const KernelOptions &opt = {}) {
    const auto n = static_cast<std::size_t>(std::llround(opt.points_per_period * opt.periods));
    return uniform_grid(0.0, opt.periods * period(d), std::max<std::size_t>(n, 1));
}

/// Gibbs value of s = (rho_ee - rho_gg)/2 for splitting `omega`.
inline double equilibrium_polarization(double beta, double omega) {
    require(omega > 0.0, "equilibrium polarization needs omega > 0");
    if (std::isinf(beta)) return -0.5;
    return -0.5 * std::tanh(0.5 * beta * omega);
}

namespace detail {

/// integral_0^t exp(i k tau) d tau.
inline cplx ramp_integral(double kappa, double t) noexcept {
    const double x = 0.5 * kappa * t;
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        const double sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        return t * sinc * std::polar(1.0, x);
    }
    return (std::polar(1.0, 2.0 * x) - 1.0) / cplx(0.0, kappa);
}

/// Evaluates the overlap integrand for one table time. `direction` is -1
/// for J_e (detuning omega_a - w) and +1 for J_g (omega_a + w).
class OverlapIntegrand {
   public:
    OverlapIntegrand(const BathSpec &b, double omega_a, double Omega, const std::vector<Sideband> &bands, double t,
                     int direction)
        : bath_(b), omega_a_(omega_a), Omega_(Omega), bands_(bands), t_(t), direction_(direction) {
        harmonics_.reserve(bands.size());
        for (const Sideband &s : bands) harmonics_.push_back(std::polar(1.0, s.n * Omega * t));
    }

    /// integral_0^t eps(tau) exp(-+ i w tau) d tau (envelope form).
    cplx amplitude(double w) const {
        const double base = omega_a_ + direction_ * w;
        cplx sum = 0.0;
        for (std::size_t k = 0; k < bands_.size(); ++k) {
            const double kappa = base + bands_[k].n * Omega_;
            sum += bands_[k].weight * ramp_integral(kappa, t_);
        }
        return sum;
    }

    /// d/dt of the amplitude: eps(t) exp(-+ i w t) in envelope form.
    cplx amplitude_rate(double w) const {
        const cplx carrier = std::polar(1.0, (omega_a_ + direction_ * w) * t_);
        cplx sum = 0.0;
        for (std::size_t k = 0; k < bands_.size(); ++k) sum += bands_[k].weight * harmonics_[k];
        return carrier * sum;
    }

    double integral_density(double w) const {
        return response(bath_, w) * std::norm(amplitude(w)) / (2.0 * std::numbers::pi);
    }

    double rate_density(double w) const {
        return response(bath_, w) * 2.0 * std::real(std::conj(amplitude(w)) * amplitude_rate(w)) /
               (2.0 * std::numbers::pi);
    }

   private:
    const BathSpec &bath_;
    double omega_a_;
    double Omega_;
    const std::vector<Sideband> &bands_;
    std::vector<cplx> harmonics_;
    double t_;
    int direction_;
};

/// Break points for the frequency integral: support edges, the Lorentzian
/// peaks and shoulders, and every resonance of a non-negligible sideband.
inline std::vector<double> overlap_breaks(const BathSpec &b, double omega_a, double Omega,
                                          const std::vector<Sideband> &bands, int direction,
                                          const SpectralCutoffs &cut) {
    std::vector<double> pts;
    const auto support = response_support(b, cut);
    for (const FrequencyInterval &iv : support) {
        pts.push_back(iv.lo);
        pts.push_back(iv.hi);
    }
    auto inside = [&](double w) {
        for (const FrequencyInterval &iv : support) {
            if (w > iv.lo && w < iv.hi) return true;
        }
        return false;
    };
    const double g = b.width();
    for (double c : {b.omega0, -b.omega0}) {
        for (double k : {0.0, -1.0, 1.0, -5.0, 5.0}) {
            if (inside(c + k * g)) pts.push_back(c + k * g);
        }
    }
    for (const Sideband &s : bands) {
        if (std::abs(s.weight) < 1e-8) continue;
        const double res = -direction * (omega_a + s.n * Omega);
        if (inside(res)) pts.push_back(res);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class Eval>
double integrate_over_support(const BathSpec &b, const std::vector<double> &breaks, const SpectralCutoffs &cut,
                              const QuadratureOptions &q, Eval &&eval) {
    double total = 0.0;
    for (const FrequencyInterval &iv : response_support(b, cut)) {
        std::vector<double> local;
        for (double p : breaks) {
            if (p >= iv.lo && p <= iv.hi) local.push_back(p);
        }
        total += integrate_adaptive(eval, std::span<const double>(local), q).value;
    }
    return total;
}

}  // namespace detail

/// J_e(t) and J_g(t): spectral overlap of G_T with the modulation spectrum,
///     J_{e/g}(t) = (1/2pi) int dw G_T(w) |int_0^t dt' eps(t') exp(-+ i w t')|^2.
/// The inner time integral is evaluated exactly term by term from the
/// envelope sidebands; the frequency integral is adaptive.
template <PeriodicDrive D>
KernelTable relaxation_integrals(const BathSpec &b, const D &d, std::span<const double> t_grid,
                                 const KernelOptions &opt = {}) {
    validate(b);
    validate(d);
    require(!t_grid.empty() && t_grid.front() >= 0.0, "kernel time grid must be non-empty and start at t >= 0");
    require(std::is_sorted(t_grid.begin(), t_grid.end()), "kernel time grid must be sorted");

    KernelTable k;
    k.t.assign(t_grid.begin(), t_grid.end());
    k.J_e.assign(k.t.size(), 0.0);
    k.J_g.assign(k.t.size(), 0.0);
    k.dJ.assign(k.t.size(), 0.0);
    if (b.eta == 0.0) return k;

    const std::vector<Sideband> bands = envelope_sidebands(d, opt.sideband_tolerance);
    const double wa = carrier(d);
    const double Om = rate(d);
    const auto breaks_e = detail::overlap_breaks(b, wa, Om, bands, -1, opt.cutoffs);
    const auto breaks_g = detail::overlap_breaks(b, wa, Om, bands, +1, opt.cutoffs);

    parallel_for(k.t.size(), opt.threads, [&](std::size_t i) {
        const double t = k.t[i];
        if (t == 0.0) return;
        detail::OverlapIntegrand fe(b, wa, Om, bands, t, -1);
        detail::OverlapIntegrand fg(b, wa, Om, bands, t, +1);
        k.J_e[i] = detail::integrate_over_support(b, breaks_e, opt.cutoffs, opt.quadrature,
                                                  [&](double w) { return fe.integral_density(w); });
        k.J_g[i] = detail::integrate_over_support(b, breaks_g, opt.cutoffs, opt.quadrature,
                                                  [&](double w) { return fg.integral_density(w); });
        k.dJ[i] = 0.5 * (k.J_g[i] - k.J_e[i]);
    });
    return k;
}

template <PeriodicDrive D>
KernelTable relaxation_integrals(const BathSpec &b, const D &d, const KernelOptions &opt = {}) {
    const std::vector<double> grid = kernel_grid(d, opt);
    return relaxation_integrals(b, d, std::span<const double>(grid), opt);
}

/// Instantaneous rates R_e(t) = dJ_e/dt and R_g(t) = dJ_g/dt from the
/// rate integrand directly (no differentiation of tables).
struct RatePair {
    double R_e = 0.0;
    double R_g = 0.0;
};

template <PeriodicDrive D>
RatePair relaxation_rates(const BathSpec &b, const D &d, double t, const KernelOptions &opt = {}) {
    validate(b);
    validate(d);
    if (b.eta == 0.0 || t == 0.0) return {};
    const std::vector<Sideband> bands = envelope_sidebands(d, opt.sideband_tolerance);
    const double wa = carrier(d);
    const double Om = rate(d);
    detail::OverlapIntegrand fe(b, wa, Om, bands, t, -1);
    detail::OverlapIntegrand fg(b, wa, Om, bands, t, +1);
    RatePair r;
    r.R_e = detail::integrate_over_support(b, detail::overlap_breaks(b, wa, Om, bands, -1, opt.cutoffs), opt.cutoffs,
                                           opt.quadrature, [&](double w) { return fe.rate_density(w); });
    r.R_g = detail::integrate_over_support(b, detail::overlap_breaks(b, wa, Om, bands, +1, opt.cutoffs), opt.cutoffs,
                                           opt.quadrature, [&](double w) { return fg.rate_density(w); });
    return r;
}

enum class PolarizationForm {
    /// s = e^{-J} (int_0^t dR e^{J} + s0)
    exponential,
    /// s = s0 (1 - J) + dJ, second order in the coupling
    expansion,
};

/// Derivative of a uniformly sampled series by cubic B-spline.
inline std::vector<double> spline_derivative(std::span<const double> t, std::span<const double> y) {
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    const std::size_t n = y.size();
    // Fourth-order one-sided end slopes; the default end estimate is cruder
    // and its error leaks several nodes into the interior.
    auto slope = [h](double y0, double y1, double y2, double y3, double y4) {
        return (-25.0 * y0 + 48.0 * y1 - 36.0 * y2 + 16.0 * y3 - 3.0 * y4) / (12.0 * h);
    };
    double left = std::numeric_limits<double>::quiet_NaN();
    double right = left;
    if (n >= 5) {
        left = slope(y[0], y[1], y[2], y[3], y[4]);
        right = -slope(y[n - 1], y[n - 2], y[n - 3], y[n - 4], y[n - 5]);
    }
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(y.begin(), y.end(), t.front(), h, left, right);
    std::vector<double> d(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) d[i] = spline.prime(t[i]);
    return d;
}

/// Fills k.s. The exponential form needs dR = d(dJ)/dt, taken from a cubic
/// spline of the dJ column; the spline derivative is compared against the
/// one obtained from every other grid point and the table is rejected when
/// they disagree by more than `derivative_tolerance` (relative to max |dR|).
inline KernelTable polarization_trajectory(KernelTable k, double s0,
                                           PolarizationForm form = PolarizationForm::exponential,
                                           double derivative_tolerance = 1e-3) {
    require(s0 >= -0.5 && s0 <= 0.5, "initial polarization must lie in [-1/2, 1/2]");
    require(k.J_e.size() == k.t.size() && k.J_g.size() == k.t.size(), "kernel table is not filled");
    const std::size_t n = k.t.size();
    k.s.assign(n, s0);
    if (form == PolarizationForm::expansion) {
        for (std::size_t i = 0; i < n; ++i) {
            k.s[i] = s0 * (1.0 - (k.J_e[i] + k.J_g[i])) + k.dJ[i];
        }
        return k;
    }
    if (n < 2) return k;
    require(is_uniform(k.t), "exponential polarization form needs a uniform time grid");
    if (n < 9) {
        throw NumericalError("time grid too coarse for spline differentiation", "points=" + std::to_string(n));
    }

    const std::vector<double> rate = spline_derivative(k.t, k.dJ);
    double scale = 0.0;
    for (double r : rate) scale = std::max(scale, std::abs(r));
    if (scale > 0.0) {
        std::vector<double> t_half, y_half;
        for (std::size_t i = 0; i < n; i += 2) {
            t_half.push_back(k.t[i]);
            y_half.push_back(k.dJ[i]);
        }
        const std::vector<double> rate_half = spline_derivative(t_half, y_half);
        double worst = 0.0;
        double where = 0.0;
        // The two end intervals are governed by the spline end conditions.
        for (std::size_t j = 2; j + 2 < t_half.size(); ++j) {
            const double diff = std::abs(rate_half[j] - rate[2 * j]);
            if (diff > worst) {
                worst = diff;
                where = t_half[j];
            }
        }
        if (worst > derivative_tolerance * scale) {
            std::ostringstream diag;
            diag << "relative disagreement " << worst / scale << " at t=" << where << " (points=" << n << ")";
            throw NumericalError("time grid too coarse for stable rate differentiation", diag.str());
        }
    }

    std::vector<double> weighted(n);
    for (std::size_t i = 0; i < n; ++i) {
        weighted[i] = rate[i] * std::exp(k.J_e[i] + k.J_g[i]);
    }
    const std::vector<double> accumulated = cumulative_trapezoid(k.t, weighted);
    for (std::size_t i = 0; i < n; ++i) {
        k.s[i] = std::exp(-(k.J_e[i] + k.J_g[i])) * (accumulated[i] + s0);
    }
    return k;
}

/// CSV with header `t,J_e,J_g,dJ,s` and 17 significant digits. A table
/// without polarization writes nan in the s column.
inline void write_csv(std::ostream &os, const KernelTable &k) {
    os << "t,J_e,J_g,dJ,s\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < k.size(); ++i) {
        os << k.t[i] << ',' << k.J_e[i] << ',' << k.J_g[i] << ',' << k.dJ[i] << ',';
        if (k.has_polarization()) {
            os << k.s[i];
        } else {
            os << "nan";
        }
        os << '\n';
    }
}

}  // namespace qndwork
