# Copyright 2026 The qndwork Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Shared reference formulas, written directly from the model definitions."""

import numpy as np

FIG1 = dict(omega_a=1.0, delta=0.25, Omega=2.5, omega0=1.0 + 3.0 / 7.0, tc=10.0, beta=3.74)


def g0(w, eta, omega0, tc):
    w = np.asarray(w, dtype=float)
    gam = 1.0 / tc
    out = eta**2 * gam / ((w - omega0) ** 2 + gam**2)
    return np.where(w >= 0.0, out, 0.0)


def gT(w, eta, omega0, tc, beta):
    """(1 + n(w)) G0(w) + n(-w) G0(-w) with n(x) = 1/(exp(beta x) - 1)."""
    w = np.asarray(w, dtype=float)
    if np.isinf(beta):
        return g0(w, eta, omega0, tc)
    out = np.empty_like(w)
    pos = w > 0
    neg = w < 0
    n_pos = 1.0 / np.expm1(beta * w[pos])
    out[pos] = (1.0 + n_pos) * g0(w[pos], eta, omega0, tc)
    n_abs = 1.0 / np.expm1(beta * -w[neg])
    out[neg] = n_abs * g0(-w[neg], eta, omega0, tc)
    out[w == 0] = 0.0
    return out


def support(omega0, tc, beta, span=40.0, floor=1.0):
    lo = max(floor / tc, omega0 - span / tc)
    hi = omega0 + span / tc
    iv = [(lo, hi)]
    if not np.isinf(beta):
        iv.insert(0, (-hi, -lo))
    return iv


def eps(tau, omega_a, delta, Omega):
    """exp(i int_0^tau w(t') dt') for w = omega_a + delta sin(Omega t)."""
    return np.exp(1j * (omega_a * tau + delta / Omega * (1.0 - np.cos(Omega * tau))))


def gauss_nodes(intervals, panel, order=8):
    x, wt = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in intervals:
        n = max(1, int(np.ceil((hi - lo) / panel)))
        edges = np.linspace(lo, hi, n + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * wt)
    return np.concatenate(nodes), np.concatenate(weights)


def cpp(name, value):
    return f"inline constexpr double {name} = {float(value)!r};"
