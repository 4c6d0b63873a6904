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
"""Relaxation integrals and cycle work by brute-force sums.

J_{e/g}(t) = (1/2pi) int dw G_T(w) |int_0^t eps(tau) exp(-+ i w tau) dtau|^2
on the truncated support (|w - w0| <= 40/tc, |w| >= 1/tc).
"""

import numpy as np

from common import FIG1, cpp, eps, gT, gauss_nodes, support


def riemann_J(t, eta, f, n=10_000):
    """Midpoint double sum, n frequencies per support interval times n times."""
    tau = (np.arange(n) + 0.5) * t / n
    e = eps(tau, f["omega_a"], f["delta"], f["Omega"]) * (t / n)
    out = {}
    for name, sign in (("e", -1.0), ("g", +1.0)):
        total = 0.0
        for lo, hi in support(f["omega0"], f["tc"], f["beta"]):
            w = lo + (np.arange(n) + 0.5) * (hi - lo) / n
            for chunk in np.array_split(np.arange(n), 20):
                amp = np.exp(1j * sign * np.outer(w[chunk], tau)) @ e
                total += np.sum(gT(w[chunk], eta, f["omega0"], f["tc"], f["beta"]) * np.abs(amp) ** 2) * (hi - lo) / n
        out[name] = total / (2 * np.pi)
    return out


def closed_form_riemann(eta, omega_a, delta, Omega, omega0, tc, n=2_000_000):
    lo, hi = support(omega0, tc, np.inf)[0]
    w = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    wp = w + omega_a
    g = eta**2 / tc / ((w - omega0) ** 2 + tc**-2)

    def sinc(x):
        return np.sin(x) / x

    integrand = g * 2 * np.pi / wp**2 * (sinc(2 * np.pi * (wp + Omega) / Omega) + sinc(2 * np.pi * (wp - Omega) / Omega))
    return delta / (2 * np.pi) * np.sum(integrand) * (hi - lo) / n


def trapezoid_work(eta, f, points=100_000, s0=None):
    """W = -oint s wdot dt with s from the exponential solution, all by trapezoid."""
    period = 2 * np.pi / f["Omega"]
    t = np.linspace(0.0, period, points + 1)
    e = eps(t, f["omega_a"], f["delta"], f["Omega"])
    w, wt = gauss_nodes(support(f["omega0"], f["tc"], f["beta"]), panel=0.01, order=10)
    J = {}
    for name, sign in (("e", -1.0), ("g", +1.0)):
        acc = np.zeros_like(t)
        for chunk in np.array_split(np.arange(w.size), max(1, w.size // 40)):
            integrand = e[None, :] * np.exp(1j * sign * np.outer(w[chunk], t))
            h = t[1] - t[0]
            amp = np.concatenate([np.zeros((chunk.size, 1)), np.cumsum(0.5 * h * (integrand[:, 1:] + integrand[:, :-1]), axis=1)], axis=1)
            dens = gT(w[chunk], eta, f["omega0"], f["tc"], f["beta"]) * wt[chunk]
            acc += dens @ np.abs(amp) ** 2
        J[name] = acc / (2 * np.pi)
    dJ = 0.5 * (J["g"] - J["e"])
    rate = np.gradient(dJ, t, edge_order=2)
    Jt = J["e"] + J["g"]
    weighted = rate * np.exp(Jt)
    acc = np.concatenate([[0.0], np.cumsum(0.5 * (weighted[1:] + weighted[:-1]) * np.diff(t))])
    if s0 is None:
        s0 = -0.5 * np.tanh(0.5 * f["beta"] * f["omega_a"])
    s = np.exp(-Jt) * (acc + s0)
    wdot = f["delta"] * f["Omega"] * np.cos(f["Omega"] * t)
    y = s * wdot
    return -np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)), J


def main():
    f = dict(FIG1)
    t = 2 * np.pi / f["Omega"]
    J = riemann_J(t, 1.0, f)
    print(cpp("kJeFig1Period", J["e"]))
    print(cpp("kJgFig1Period", J["g"]))

    cf = closed_form_riemann(0.2, 1.0, 0.05, 2.5, 10.0 / 7.0, 10.0)
    print(cpp("kClosedFormDelta005", cf))

    W, Jf = trapezoid_work(0.2, f)
    print(cpp("kWorkFig1Trapezoid", W))
    print(cpp("kJeFig1PeriodCheck", Jf["e"][-1] / 0.04))


if __name__ == "__main__":
    main()
