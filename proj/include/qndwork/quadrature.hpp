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
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qndwork/error.hpp"

namespace qndwork {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel &o) const noexcept {
        return error < o.error;
    }
};

template <class F>
Panel gk21_panel(F &f, double a, double b) {
    double err = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err);
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod integration over the union of
/// [breaks[i], breaks[i+1]]. The panel with the largest error estimate is
/// bisected until the summed error drops below max(abs_tol, rel_tol*|I|).
///
/// Throws NumericalError with the worst remaining panel when the interval
/// budget runs out.
template <class F>
QuadratureResult integrate_adaptive(F &&f, std::span<const double> breaks, const QuadratureOptions &opt = {}) {
    std::priority_queue<detail::Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        detail::Panel p = detail::gk21_panel(f, breaks[i], breaks[i + 1]);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    auto require_finite = [&] {
        if (!std::isfinite(total) || !std::isfinite(total_err)) {
            throw NumericalError("integrand returned a non-finite value",
                                 "running estimate " + std::to_string(total));
        }
    };
    require_finite();
    int count = static_cast<int>(heap.size());
    while (!heap.empty() && total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (count >= opt.max_intervals) {
            const detail::Panel &w = heap.top();
            std::ostringstream diag;
            diag << "intervals=" << count << " error=" << total_err << " worst=[" << w.a << ", " << w.b
                 << "] worst_error=" << w.error;
            throw NumericalError("adaptive quadrature did not converge", diag.str());
        }
        detail::Panel w = heap.top();
        heap.pop();
        const double mid = 0.5 * (w.a + w.b);
        if (!(mid > w.a && mid < w.b)) {
            std::ostringstream diag;
            diag << "panel [" << w.a << ", " << w.b << "] cannot be bisected, error=" << w.error;
            throw NumericalError("adaptive quadrature hit floating-point resolution", diag.str());
        }
        detail::Panel l = detail::gk21_panel(f, w.a, mid);
        detail::Panel r = detail::gk21_panel(f, mid, w.b);
        total += l.value + r.value - w.value;
        total_err += l.error + r.error - w.error;
        heap.push(l);
        heap.push(r);
        ++count;
        require_finite();
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error, count};
}

template <class F>
QuadratureResult integrate_adaptive(F &&f, double a, double b, const QuadratureOptions &opt = {}) {
    const double breaks[2] = {a, b};
    return integrate_adaptive(std::forward<F>(f), std::span<const double>(breaks, 2), opt);
}

/// n + 1 equally spaced points covering [a, b].
inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    }
    g.back() = b;
    return g;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    return s;
}

/// Composite Simpson on a uniform grid; falls back to the trapezoid rule on
/// the final panel when the number of intervals is odd.
inline double simpson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size() - 1;
    if (n < 2) return trapezoid(x, y);
    const std::size_t even = n - (n % 2);
    const double h = (x[even] - x[0]) / static_cast<double>(even);
    double s = y[0] + y[even];
    for (std::size_t i = 1; i < even; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * y[i];
    }
    s *= h / 3.0;
    if (even != n) {
        s += 0.5 * (x[n] - x[n - 1]) * (y[n] + y[n - 1]);
    }
    return s;
}

/// Running trapezoid integral, out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> x, std::span<const double> y) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return out;
}

inline bool is_uniform(std::span<const double> x, double rel_tol = 1e-9) {
    if (x.size() < 3) return true;
    const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (std::abs((x[i] - x[i - 1]) - h) > rel_tol * std::abs(h) + 1e-15) return false;
    }
    return true;
}

}  // namespace qndwork
