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
#include <complex>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/math/quadrature/gauss.hpp>

#include "qndwork/error.hpp"
#include "qndwork/exactsim/model.hpp"
#include "qndwork/exactsim/state.hpp"
#include "qndwork/modulation.hpp"
#include "qndwork/work.hpp"

namespace qndwork::exactsim {

/// h(t) = (pi / 4 tau) (tanh^2((t - t_m)/tau) - 1).
inline double pulse_profile(const PulseSpec &p, double t) noexcept {
    const double th = std::tanh((t - p.t_m) / p.tau_m);
    return std::numbers::pi / (4.0 * p.tau_m) * (th * th - 1.0);
}

/// Integral of h over [a, b]; -pi/2 over the real line.
inline double pulse_area(const PulseSpec &p, double a, double b) noexcept {
    return std::numbers::pi / 4.0 * (std::tanh((a - p.t_m) / p.tau_m) - std::tanh((b - p.t_m) / p.tau_m));
}

struct EnergyTrace {
    std::vector<double> t;
    std::vector<double> E_S;
    std::vector<double> E_B;
    std::vector<double> E_SB;
    std::vector<double> E_piston;
    std::vector<double> sp_coherence;  // NaN without a probe
    std::vector<double> s;             // (rho_ee - rho_gg)/2
};

inline void write_csv(std::ostream &os, const EnergyTrace &tr) {
    const auto prec = os.precision(17);
    os << "t,E_S,E_B,E_SB,E_piston,sp_coherence\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        os << tr.t[i] << ',' << tr.E_S[i] << ',' << tr.E_B[i] << ',' << tr.E_SB[i] << ',' << tr.E_piston[i] << ','
           << tr.sp_coherence[i] << '\n';
    }
    os.precision(prec);
}

struct PropagationOptions {
    double dt_max = 0.1;
    double dt_min = 1e-10;
    /// Accepted when the step-doubling estimate of every traced observable
    /// changes by less than this per step.
    double tolerance = 1e-8;
    std::size_t max_steps = 2'000'000;
};

/// Time-dependent generator of the supersystem. The drive is held at
/// omega_a before drive.t_start; the CNOT pulse is active only with a probe
/// and a finite-width pulse.
class Propagator {
   public:
    Propagator(SupersystemModel model, Operators ops) : model_(std::move(model)), ops_(std::move(ops)) {
        pulse_on_ = ops_.layout.probe && !model_.pulse.instantaneous;
        if (pulse_on_) require(model_.pulse.tau_m > 0.0, "pulse tau_m must be > 0");
        if (ops_.layout.probe) build_coherence_pairs();
        double hi = 0.0;
        for (Eigen::Index i = 0; i < ops_.h_bath.rows(); ++i) hi = std::max(hi, ops_.h_bath.coeff(i, i));
        SparseOp shift(ops_.h_bath.rows(), ops_.h_bath.cols());
        shift.setIdentity();
        h0_ = ops_.h_bath + ops_.h_sb - (0.5 * hi) * shift;
        h0_.makeCompressed();
    }

    const SupersystemModel &model() const noexcept {
        return model_;
    }
    const Operators &operators() const noexcept {
        return ops_;
    }
    const Layout &layout() const noexcept {
        return ops_.layout;
    }
    bool pulse_on() const noexcept {
        return pulse_on_;
    }

    double omega(double t) const noexcept {
        return t < model_.drive.t_start ? model_.drive.omega_a : omega_of_t(model_.drive, t);
    }
    double omega_dot(double t) const noexcept {
        return t < model_.drive.t_start ? 0.0 : qndwork::omega_dot(model_.drive, t);
    }

    /// H(t), shifted by a constant so its diagonal is centered on zero.
    SparseOp hamiltonian(double t) const {
        SparseOp h = omega(t) * ops_.sz_half + h0_;
        if (pulse_on_) h += pulse_profile(model_.pulse, t) * ops_.probe_flip;
        return h;
    }

    /// X <- exp(-i H dt) X by a Taylor series, split into substeps with
    /// ||H dt||_inf <= 1. The number of terms follows from the norm bound.
    static void apply_exponential(const SparseOp &h, double dt, Eigen::MatrixXcd &x) {
        double norm = 0.0;
        for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
            double row = 0.0;
            for (SparseOp::InnerIterator it(h, r); it; ++it) row += std::abs(it.value());
            norm = std::max(norm, row);
        }
        const int sub = std::max(1, static_cast<int>(std::ceil(norm * std::abs(dt))));
        const double h_dt = dt / sub;
        const double z = norm * std::abs(h_dt);
        int terms = 1;
        for (double bound = z; bound > 1e-17 && terms < 40; ++terms) bound *= z / (terms + 1);
        const std::complex<double> minus_i(0.0, -1.0);
        Eigen::MatrixXcd term(x.rows(), x.cols());
        for (int k = 0; k < sub; ++k) {
            term = x;
            for (int n = 1; n <= terms; ++n) {
                term = (minus_i * (h_dt / n)) * (h * term);
                x += term;
            }
        }
    }

    /// X <- U(t + dt, t) X with the fourth-order commutator-free exponential
    /// built from H at the two Gauss points of the step.
    void advance(Eigen::MatrixXcd &x, double t, double dt) const {
        constexpr double r3 = 1.7320508075688772;
        const SparseOp h1 = hamiltonian(t + (0.5 - r3 / 6.0) * dt);
        const SparseOp h2 = hamiltonian(t + (0.5 + r3 / 6.0) * dt);
        constexpr double a1 = 0.25 + r3 / 6.0;
        constexpr double a2 = 0.25 - r3 / 6.0;
        SparseOp first = a1 * h1 + a2 * h2;
        SparseOp second = a2 * h1 + a1 * h2;
        apply_exponential(first, dt, x);
        apply_exponential(second, dt, x);
    }

    /// rho <- U rho U^+ for one step.
    Eigen::MatrixXcd step(const Eigen::MatrixXcd &rho, double t, double dt) const {
        Eigen::MatrixXcd a = rho;
        advance(a, t, dt);  // U rho
        Eigen::MatrixXcd b = a.adjoint();
        advance(b, t, dt);  // U rho U^+
        return 0.5 * (b + b.adjoint());
    }

    struct Observables {
        double E_S, E_B, E_SB, s, coherence;
    };

    Observables observe(const Eigen::MatrixXcd &rho, double t) const {
        Observables o{};
        o.s = expectation(rho, ops_.sz_half);
        o.E_S = omega(t) * o.s;
        o.E_B = expectation(rho, ops_.h_bath);
        o.E_SB = expectation(rho, ops_.h_sb);
        o.coherence = std::numeric_limits<double>::quiet_NaN();
        if (ops_.layout.probe) {
            o.coherence = 0.0;
            for (const auto &[i, j] : pairs_) o.coherence = std::max(o.coherence, std::abs(rho(i, j)));
        }
        return o;
    }

   private:
    /// (|e,1,n>, |g,0,n'>) with n' = n +- one quantum in a single mode.
    void build_coherence_pairs() {
        const Layout &L = ops_.layout;
        for (std::size_t mm = 0; mm < L.bath_dim(); ++mm) {
            const std::vector<int> &occ = L.bath->occupations(mm);
            for (std::size_t k = 0; k < occ.size(); ++k) {
                for (int d : {-1, 1}) {
                    std::vector<int> other = occ;
                    other[k] += d;
                    if (other[k] < 0) continue;
                    const int j = L.bath->find(other);
                    if (j < 0) continue;
                    pairs_.emplace_back(static_cast<Eigen::Index>(L.index(1, 1, mm)),
                                        static_cast<Eigen::Index>(L.index(0, 0, static_cast<std::size_t>(j))));
                }
            }
        }
    }

    SupersystemModel model_;
    Operators ops_;
    SparseOp h0_;
    bool pulse_on_ = false;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

struct PropagationResult {
    DensityOperator rho;
    EnergyTrace trace;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double max_step_error = 0.0;
};

namespace detail {

inline double observable_gap(const Propagator::Observables &a, const Propagator::Observables &b) {
    double g = std::max({std::abs(a.E_S - b.E_S), std::abs(a.E_B - b.E_B), std::abs(a.E_SB - b.E_SB),
                         std::abs(a.s - b.s)});
    if (!std::isnan(a.coherence)) g = std::max(g, std::abs(a.coherence - b.coherence));
    return g;
}

/// Times a step must land on: drive switch-on and the pulse window edges.
inline std::vector<double> step_barriers(const Propagator &p, double t0, double t1) {
    std::vector<double> b{p.model().drive.t_start};
    if (p.pulse_on()) {
        const PulseSpec &ps = p.model().pulse;
        b.push_back(ps.t_m - 8.0 * ps.tau_m);
        b.push_back(ps.t_m);
        b.push_back(ps.t_m + 8.0 * ps.tau_m);
    }
    std::vector<double> out;
    for (double x : b)
        if (x > t0 && x < t1) out.push_back(x);
    out.push_back(t1);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

/// Evolves rho from t0 to t1 under H(t) with step-doubling control and
/// records the energy trace. E_piston(t) = -int_{t0}^{t} wdot s dt' is
/// accumulated by Simpson's rule over each accepted step.
inline PropagationResult propagate(const Propagator &prop, const DensityOperator &rho0, double t0, double t1,
                                   const PropagationOptions &opt = {}) {
    require(t1 > t0, "propagation needs t1 > t0");
    require(opt.dt_max > 0.0 && opt.tolerance > 0.0, "dt_max and tolerance must be > 0");
    require(rho0.dim() == prop.layout().dim(), "state does not match the propagator layout");
    PropagationResult res;
    res.rho = rho0;
    Eigen::MatrixXcd rho = rho0.matrix;

    auto record = [&](double t, const Propagator::Observables &o, double piston) {
        res.trace.t.push_back(t);
        res.trace.E_S.push_back(o.E_S);
        res.trace.E_B.push_back(o.E_B);
        res.trace.E_SB.push_back(o.E_SB);
        res.trace.E_piston.push_back(piston);
        res.trace.sp_coherence.push_back(o.coherence);
        res.trace.s.push_back(o.s);
    };

    double t = t0;
    double piston = 0.0;
    Propagator::Observables obs = prop.observe(rho, t);
    record(t, obs, piston);
    const std::vector<double> barriers = detail::step_barriers(prop, t0, t1);
    std::size_t next_barrier = 0;
    double dt = opt.dt_max;
    const PulseSpec &ps = prop.model().pulse;

    while (t < t1) {
        while (barriers[next_barrier] <= t) ++next_barrier;
        double cap = opt.dt_max;
        if (prop.pulse_on() && t >= ps.t_m - 8.0 * ps.tau_m && t < ps.t_m + 8.0 * ps.tau_m) {
            cap = std::min(cap, 0.25 * ps.tau_m);
        }
        double h = std::min({dt, cap, barriers[next_barrier] - t});
        bool clipped = h < dt;
        if (res.steps + res.rejected >= opt.max_steps) {
            throw NumericalError("propagation step budget exhausted", "t=" + std::to_string(t));
        }
        for (;;) {
            const Eigen::MatrixXcd full = prop.step(rho, t, h);
            const Eigen::MatrixXcd mid = prop.step(rho, t, 0.5 * h);
            const Eigen::MatrixXcd fine = prop.step(mid, t + 0.5 * h, 0.5 * h);
            const Propagator::Observables o_full = prop.observe(full, t + h);
            const Propagator::Observables o_fine = prop.observe(fine, t + h);
            const double err = detail::observable_gap(o_full, o_fine);
            if (err <= opt.tolerance) {
                const Propagator::Observables o_mid = prop.observe(mid, t + 0.5 * h);
                // The drive starts at a barrier, so a step lies wholly on one
                // side of it; wdot jumps there and must not leak backwards.
                // s is interpolated quadratically through the three samples
                // and integrated against the exact wdot.
                if (t + 0.5 * h > prop.model().drive.t_start) {
                    const double s0 = obs.s, s1 = o_mid.s, s2 = o_fine.s;
                    auto integrand = [&](double u) {
                        const double s_u = s0 + u * (-3.0 * s0 + 4.0 * s1 - s2) + 2.0 * u * u * (s0 - 2.0 * s1 + s2);
                        return s_u * prop.omega_dot(t + u * h);
                    };
                    piston -= h * boost::math::quadrature::gauss<double, 8>::integrate(integrand, 0.0, 1.0);
                }
                rho = fine;
                const bool at_barrier = std::abs(t + h - barriers[next_barrier]) <= 1e-14 * std::max(1.0, std::abs(t1));
                t = at_barrier ? barriers[next_barrier] : t + h;
                obs = o_fine;
                record(t, obs, piston);
                ++res.steps;
                res.max_step_error = std::max(res.max_step_error, err);
                const double grow = err > 0.0 ? std::clamp(0.9 * std::pow(opt.tolerance / err, 0.2), 0.2, 2.0) : 2.0;
                // A step clipped by a barrier or cap says little about the natural step.
                dt = clipped ? std::max(dt, h * grow) : h * grow;
                dt = std::min(dt, opt.dt_max);
                break;
            }
            ++res.rejected;
            h *= 0.5;
            dt = h;
            clipped = false;
            if (h < opt.dt_min) {
                std::ostringstream diag;
                diag << "t=" << t << " dt=" << h << " achieved_error=" << err << " tolerance=" << opt.tolerance;
                throw NumericalError("propagation step size fell below dt_min", diag.str());
            }
        }
    }
    res.rho.matrix = std::move(rho);
    return res;
}

/// Propagation across a finite CNOT pulse. [t0, t1] must contain
/// [t_m - 6 tau_m, t_m + 6 tau_m].
inline DensityOperator cnot_pulse_propagate(const Propagator &prop, const DensityOperator &rho, double t0, double t1,
                                            const PropagationOptions &opt = {}) {
    require(prop.layout().probe, "the CNOT pulse needs the probe");
    require(prop.pulse_on(), "the model has no finite-width pulse");
    const PulseSpec &ps = prop.model().pulse;
    require(t0 <= ps.t_m - 6.0 * ps.tau_m && t1 >= ps.t_m + 6.0 * ps.tau_m,
            "pulse propagation interval must cover t_m +- 6 tau_m");
    return propagate(prop, rho, t0, t1, opt).rho;
}

/// |Tr(CNOT^+ U)| / 4 for the S-P unitary induced over [t0, t1], computed
/// on the bath vacuum with the free qubit phase removed. Meaningful when
/// the bath is decoupled (eta = 0).
inline double cnot_fidelity(const Propagator &prop, double t0, double t1, double dt_max = 0.05) {
    require(prop.layout().probe && prop.pulse_on(), "the CNOT fidelity needs a probe and a finite pulse");
    const Layout &L = prop.layout();
    const auto D = static_cast<Eigen::Index>(L.dim());
    std::array<Eigen::Index, 4> idx{};
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(D, 4);
    for (int s = 0; s < 2; ++s)
        for (int p = 0; p < 2; ++p) {
            idx[2 * s + p] = static_cast<Eigen::Index>(L.index(s, p, 0));
            x(idx[2 * s + p], 2 * s + p) = 1.0;
        }
    const PulseSpec &ps = prop.model().pulse;
    std::vector<double> edges{t0};
    for (double e : {ps.t_m - 8.0 * ps.tau_m, ps.t_m + 8.0 * ps.tau_m, prop.model().drive.t_start})
        if (e > t0 && e < t1) edges.push_back(e);
    edges.push_back(t1);
    std::sort(edges.begin(), edges.end());
    double phase = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double a = edges[k];
        const double b = edges[k + 1];
        const bool in_pulse = a >= ps.t_m - 8.0 * ps.tau_m && b <= ps.t_m + 8.0 * ps.tau_m;
        const double h_max = in_pulse ? 0.05 * ps.tau_m : dt_max;
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h_max)));
        const double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
            const double t = a + i * h;
            prop.advance(x, t, h);
            phase += prop.omega(t + 0.5 * h) * h;
        }
    }
    Eigen::Matrix4cd u;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) u(r, c) = x(idx[r], c);
    // Undo exp(-i phase sz/2): rows of |g> carry exp(+i phase/2).
    for (int c = 0; c < 4; ++c) {
        u(0, c) *= std::polar(1.0, -0.5 * phase);
        u(1, c) *= std::polar(1.0, -0.5 * phase);
        u(2, c) *= std::polar(1.0, 0.5 * phase);
        u(3, c) *= std::polar(1.0, 0.5 * phase);
    }
    Eigen::Matrix4cd cnot = Eigen::Matrix4cd::Zero();
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    return std::abs((cnot.adjoint() * u).trace()) / 4.0;
}

/// W_tot = W_cycle - dE_meas with W_cycle = E_piston(t_end). Throws
/// NumericalError when W_tot exceeds +tolerance.
inline WorkLedger total_work_audit(const EnergyTrace &trace, double dE_meas, double tolerance = 1e-8) {
    require(!trace.t.empty(), "empty energy trace");
    require(trace.E_piston.front() == 0.0, "the energy trace must start at the measurement");
    WorkLedger w;
    w.dE_meas = dE_meas;
    w.W_cycle = trace.E_piston.back();
    w.W_tot = *w.W_cycle - dE_meas;
    if (*w.W_tot > tolerance) {
        std::ostringstream diag;
        diag << "W_cycle=" << *w.W_cycle << " dE_meas=" << dE_meas << " W_tot=" << *w.W_tot
             << " tolerance=" << tolerance;
        throw NumericalError("positive total work from a single bath: unconverged or invalid model", diag.str());
    }
    return w;
}

/// Thermodynamic bookkeeping of an instantaneous NSM on a Gibbs state,
/// computed from the S+B states themselves.
struct MeasurementLedger {
    double p_e = 0.0;
    double E_before = 0.0;
    double E_after = 0.0;
    double S_before = 0.0;
    double S_after = 0.0;
    double S_system = 0.0;  // entropy of the reduced qubit state
    double E_stab = 0.0;
    double sb_before = 0.0;
    double sb_after = 0.0;
    WorkLedger ledger;
    DensityOperator rho_after;
};

inline MeasurementLedger measure(const Operators &ops, const ThermalState &eq, double omega) {
    MeasurementLedger out;
    const double T = std::isinf(eq.beta) ? 0.0 : 1.0 / eq.beta;
    const SparseOp h = static_hamiltonian(ops, omega);
    out.rho_after = nsm_channel(eq.rho);
    out.E_before = expectation(eq.rho, h);
    out.E_after = expectation(out.rho_after, h);
    out.sb_before = expectation(eq.rho, ops.h_sb);
    out.sb_after = expectation(out.rho_after, ops.h_sb);
    out.S_before = eq.entropy;
    out.S_system = von_neumann_entropy(Eigen::MatrixXcd(reduced_system(eq.rho)));

    // The post-measurement state is block diagonal in the qubit basis, so its
    // spectrum, and that of each selective outcome, comes from the blocks.
    const auto half = static_cast<Eigen::Index>(eq.rho.layout.probe_dim() * eq.rho.layout.bath_dim());
    double w_sel = 0.0;
    out.S_after = 0.0;
    for (Outcome o : {Outcome::g, Outcome::e}) {
        const Eigen::Index off = o == Outcome::e ? half : 0;
        const Eigen::MatrixXcd block = eq.rho.matrix.block(off, off, half, half);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
        const double p = block.trace().real();
        double s_block = 0.0;
        for (double lam : es.eigenvalues()) {
            const double q = std::max(lam, 1e-15);
            s_block -= q * std::log(q);
        }
        out.S_after += s_block;
        if (o == Outcome::e) out.p_e = p;
        if (p < 1e-14) continue;
        // S(block / p) = S_block / p + ln p.
        const double s_j = s_block / p + std::log(p);
        const SelectiveResult r = selective_channel(eq.rho, o);
        w_sel += p * ((expectation(r.rho, h) - out.E_before) - T * (s_j - out.S_before));
    }
    out.E_stab = stabilizing_energy(out.S_after, eq.free_energy, T);
    out.ledger = optimal_cycle_ledger(out.E_before, out.E_after, out.S_before, out.S_after, out.E_stab, T);
    out.ledger.W_sel_max = w_sel;
    out.ledger.W_SL = T * binary_entropy(std::clamp(out.p_e, 0.0, 1.0));
    return out;
}

struct CycleResult {
    MeasurementLedger measurement;
    EnergyTrace trace;
    WorkLedger ledger;
    std::size_t steps = 0;
};

/// Gibbs state at omega_a, instantaneous NSM at drive.t_start, then one
/// drive period of exact evolution. The ledger combines the measurement
/// bookkeeping with W_cycle and W_tot.
inline CycleResult measurement_cycle(const SupersystemModel &model, const PropagationOptions &opt = {},
                                     bool audit = true, double audit_tolerance = 1e-8) {
    Operators ops = build_operators(model, false);
    const ThermalState eq = thermal_state(model, ops, model.bath.beta);
    CycleResult out;
    out.measurement = measure(ops, eq, model.drive.omega_a);
    const double t0 = model.drive.t_start;
    const double t1 = t0 + period(model.drive);
    Propagator prop(model, std::move(ops));
    PropagationResult pr = propagate(prop, out.measurement.rho_after, t0, t1, opt);
    out.steps = pr.steps;
    out.trace = std::move(pr.trace);
    out.ledger = out.measurement.ledger;
    const double dE = out.measurement.E_after - out.measurement.E_before;
    if (audit) {
        const WorkLedger a = total_work_audit(out.trace, dE, audit_tolerance);
        out.ledger.W_cycle = a.W_cycle;
        out.ledger.W_tot = a.W_tot;
    } else {
        out.ledger.W_cycle = out.trace.E_piston.back();
        out.ledger.W_tot = *out.ledger.W_cycle - dE;
    }
    return out;
}

struct ProbeReuseReport {
    /// max |.| of (pulse, trace out P) minus (free, NSM, free) on S+B.
    double first_cycle_error = 0.0;
    /// Same comparison at the second pulse with the probe not reset.
    double second_cycle_error = 0.0;
    /// Largest S-P coherence just before the second pulse.
    double residual_coherence = 0.0;
    /// Change of the reduced probe state over the two cycles.
    double probe_drift = 0.0;
};

/// Checks that the CNOT pulse with the given probe acts on S+B as the NSM
/// channel, and repeats the check one wait interval later with the same
/// probe. `prop` must carry the probe and a finite pulse at t_m; the free
/// reference uses the same Hamiltonian without the pulse.
inline ProbeReuseReport probe_reuse_check(const SupersystemModel &model, const DensityOperator &rho_sb,
                                          const Eigen::Matrix2cd &rho_probe, double wait,
                                          const PropagationOptions &opt = {}) {
    require(!model.pulse.instantaneous, "probe reuse check needs a finite pulse");
    require(wait > 0.0, "wait must be > 0");
    const PulseSpec ps = model.pulse;
    const double half = 8.0 * ps.tau_m;

    SupersystemModel second = model;
    second.pulse.t_m = ps.t_m + wait;
    Propagator with_probe(model, build_operators(model, true));
    Propagator with_probe2(second, build_operators(second, true));
    Propagator free_sb(model, build_operators(model, false));

    auto nsm_reference = [&](const DensityOperator &r, double t_m) {
        DensityOperator a = propagate(free_sb, r, t_m - half, t_m, opt).rho;
        a = nsm_channel(a);
        return propagate(free_sb, a, t_m, t_m + half, opt).rho;
    };
    auto gap = [](const DensityOperator &a, const DensityOperator &b) {
        return (a.matrix - b.matrix).cwiseAbs().maxCoeff();
    };

    ProbeReuseReport rep;
    DensityOperator tot = attach_probe(rho_sb, rho_probe);
    tot.layout = with_probe.layout();
    tot = cnot_pulse_propagate(with_probe, tot, ps.t_m - half, ps.t_m + half, opt);
    rep.first_cycle_error = gap(trace_out_probe(tot), nsm_reference(rho_sb, ps.t_m));

    tot.layout = with_probe2.layout();
    const PropagationResult idle = propagate(with_probe2, tot, ps.t_m + half, second.pulse.t_m - half, opt);
    rep.residual_coherence = idle.trace.sp_coherence.back();
    DensityOperator before_second = trace_out_probe(idle.rho);
    before_second.layout = free_sb.layout();
    const DensityOperator after =
        cnot_pulse_propagate(with_probe2, idle.rho, second.pulse.t_m - half, second.pulse.t_m + half, opt);
    DensityOperator traced = trace_out_probe(after);
    rep.second_cycle_error = gap(traced, nsm_reference(before_second, second.pulse.t_m));
    rep.probe_drift = (reduced_probe(after) - rho_probe).cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace qndwork::exactsim
