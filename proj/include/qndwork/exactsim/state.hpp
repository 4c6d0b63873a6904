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
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qndwork/error.hpp"
#include "qndwork/exactsim/model.hpp"

namespace qndwork::exactsim {

/// Dense density matrix together with the index layout of its basis.
struct DensityOperator {
    Eigen::MatrixXcd matrix;
    Layout layout;

    std::size_t dim() const noexcept {
        return static_cast<std::size_t>(matrix.rows());
    }
};

enum class Outcome { g = 0, e = 1 };

struct StateCheck {
    double hermiticity = 0.0;
    double trace_error = 0.0;
    double min_eigenvalue = 0.0;
};

inline StateCheck check_state(const DensityOperator &rho) {
    StateCheck c;
    c.hermiticity = (rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff();
    c.trace_error = std::abs(rho.matrix.trace() - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

/// Throws NumericalError unless rho is Hermitian and unit-trace to 1e-12
/// with no eigenvalue below -1e-10.
inline void validate(const DensityOperator &rho) {
    const StateCheck c = check_state(rho);
    if (c.hermiticity > 1e-12 || c.trace_error > 1e-12 || c.min_eigenvalue < -1e-10) {
        std::ostringstream diag;
        diag << "hermiticity=" << c.hermiticity << " trace_error=" << c.trace_error
             << " min_eigenvalue=" << c.min_eigenvalue;
        throw NumericalError("invalid density operator", diag.str());
    }
}

/// Re Tr[rho O] for a real sparse O.
inline double expectation(const Eigen::MatrixXcd &rho, const SparseOp &op) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
        for (SparseOp::InnerIterator it(op, r); it; ++it) s += it.value() * rho(it.col(), r).real();
    }
    return s;
}

inline double expectation(const DensityOperator &rho, const SparseOp &op) {
    return expectation(rho.matrix, op);
}

/// -Tr[rho ln rho] with eigenvalues floored at 1e-15.
inline double von_neumann_entropy(const Eigen::MatrixXcd &rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (double lam : es.eigenvalues()) {
        const double p = std::max(lam, 1e-15);
        s -= p * std::log(p);
    }
    return s;
}

inline double von_neumann_entropy(const DensityOperator &rho) {
    return von_neumann_entropy(rho.matrix);
}

/// 2x2 reduced state of the qubit, basis (g, e).
inline Eigen::Matrix2cd reduced_system(const DensityOperator &rho) {
    const Layout &L = rho.layout;
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int s = 0; s < 2; ++s)
        for (int s2 = 0; s2 < 2; ++s2)
            for (std::size_t p = 0; p < L.probe_dim(); ++p)
                for (std::size_t m = 0; m < L.bath_dim(); ++m)
                    out(s, s2) += rho.matrix(L.index(s, static_cast<int>(p), m), L.index(s2, static_cast<int>(p), m));
    return out;
}

/// 2x2 reduced state of the probe, basis (0, 1).
inline Eigen::Matrix2cd reduced_probe(const DensityOperator &rho) {
    const Layout &L = rho.layout;
    require(L.probe, "state has no probe");
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int p = 0; p < 2; ++p)
        for (int p2 = 0; p2 < 2; ++p2)
            for (int s = 0; s < 2; ++s)
                for (std::size_t m = 0; m < L.bath_dim(); ++m)
                    out(p, p2) += rho.matrix(L.index(s, p, m), L.index(s, p2, m));
    return out;
}

/// Reduced state of the bath modes.
inline Eigen::MatrixXcd reduced_bath(const DensityOperator &rho) {
    const Layout &L = rho.layout;
    const auto M = static_cast<Eigen::Index>(L.bath_dim());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(M, M);
    for (int s = 0; s < 2; ++s)
        for (std::size_t p = 0; p < L.probe_dim(); ++p) {
            const auto o = static_cast<Eigen::Index>(L.index(s, static_cast<int>(p), 0));
            out += rho.matrix.block(o, o, M, M);
        }
    return out;
}

/// Traces out the probe, returning the S+B state.
inline DensityOperator trace_out_probe(const DensityOperator &rho) {
    const Layout &L = rho.layout;
    require(L.probe, "state has no probe");
    Layout out_layout{L.bath, false};
    const auto M = static_cast<Eigen::Index>(L.bath_dim());
    DensityOperator out{Eigen::MatrixXcd::Zero(2 * M, 2 * M), out_layout};
    for (int s = 0; s < 2; ++s)
        for (int s2 = 0; s2 < 2; ++s2)
            for (int p = 0; p < 2; ++p)
                out.matrix.block(s * M, s2 * M, M, M) +=
                    rho.matrix.block(static_cast<Eigen::Index>(L.index(s, p, 0)),
                                     static_cast<Eigen::Index>(L.index(s2, p, 0)), M, M);
    return out;
}

/// rho_SB (x) rho_P, on the layout with the probe between S and B.
inline DensityOperator attach_probe(const DensityOperator &rho_sb, const Eigen::Matrix2cd &rho_p) {
    require(!rho_sb.layout.probe, "state already carries a probe");
    Layout L{rho_sb.layout.bath, true};
    const auto M = static_cast<Eigen::Index>(L.bath_dim());
    DensityOperator out{Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(L.dim()), static_cast<Eigen::Index>(L.dim())), L};
    for (int s = 0; s < 2; ++s)
        for (int s2 = 0; s2 < 2; ++s2)
            for (int p = 0; p < 2; ++p)
                for (int p2 = 0; p2 < 2; ++p2)
                    out.matrix.block(static_cast<Eigen::Index>(L.index(s, p, 0)),
                                     static_cast<Eigen::Index>(L.index(s2, p2, 0)), M, M) =
                        rho_p(p, p2) * rho_sb.matrix.block(s * M, s2 * M, M, M);
    return out;
}

/// Probe state (I + d sz)/2.
inline Eigen::Matrix2cd probe_state(double d = 0.0) {
    require(d >= -1.0 && d <= 1.0, "probe polarization d must lie in [-1, 1]");
    Eigen::Matrix2cd p = Eigen::Matrix2cd::Zero();
    p(0, 0) = 0.5 * (1.0 + d);
    p(1, 1) = 0.5 * (1.0 - d);
    return p;
}

/// Gibbs state of H_S + H_B + H_SB at w = omega_a, with its thermodynamic
/// data. At beta = inf the state is the normalized projector on the ground
/// space.
struct ThermalState {
    DensityOperator rho;
    double energy = 0.0;
    double entropy = 0.0;
    double free_energy = 0.0;  // -T ln Z, or the ground energy at T = 0
    double beta = kInfinity;
};

inline SparseOp static_hamiltonian(const Operators &ops, double omega) {
    SparseOp h = omega * ops.sz_half + ops.h_bath + ops.h_sb;
    h.makeCompressed();
    return h;
}

inline ThermalState thermal_state(const SupersystemModel &m, const Operators &ops, double beta) {
    require(!ops.layout.probe, "thermal_state is built on the S+B layout; attach the probe afterwards");
    require(beta > 0.0 && !std::isnan(beta), "beta must be > 0 or +inf");
    const SparseOp h = static_hamiltonian(ops, m.drive.omega_a);
    const Eigen::MatrixXd hd = Eigen::MatrixXd(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hd);
    if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian diagonalization failed");
    const Eigen::VectorXd &E = es.eigenvalues();
    const double e0 = E.minCoeff();
    const double scale = std::max(1.0, E.cwiseAbs().maxCoeff());
    Eigen::VectorXd w(E.size());
    for (Eigen::Index i = 0; i < E.size(); ++i) {
        if (std::isinf(beta)) {
            w(i) = (E(i) - e0) < 1e-10 * scale ? 1.0 : 0.0;
        } else {
            w(i) = std::exp(-beta * (E(i) - e0));
        }
    }
    const double z = w.sum();
    const Eigen::VectorXd p = w / z;
    ThermalState out;
    out.beta = beta;
    const Eigen::MatrixXd rho = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().transpose();
    out.rho = DensityOperator{rho.cast<std::complex<double>>(), ops.layout};
    out.energy = p.dot(E);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) out.entropy -= p(i) * std::log(std::max(p(i), 1e-15));
    }
    out.free_energy = std::isinf(beta) ? e0 : e0 - std::log(z) / beta;
    return out;
}

/// Non-selective energy measurement of the qubit: keeps the |g> and |e>
/// diagonal blocks and zeroes the S coherences.
inline DensityOperator nsm_channel(const DensityOperator &rho) {
    const Layout &L = rho.layout;
    const auto half = static_cast<Eigen::Index>(L.probe_dim() * L.bath_dim());
    DensityOperator out = rho;
    out.matrix.block(0, half, half, half).setZero();
    out.matrix.block(half, 0, half, half).setZero();
    return out;
}

struct SelectiveResult {
    double probability = 0.0;
    DensityOperator rho;
};

/// Projective outcome j: (p_j, P_j rho P_j / p_j).
inline SelectiveResult selective_channel(const DensityOperator &rho, Outcome outcome) {
    const Layout &L = rho.layout;
    const auto half = static_cast<Eigen::Index>(L.probe_dim() * L.bath_dim());
    const Eigen::Index o = outcome == Outcome::e ? half : 0;
    const double p = rho.matrix.block(o, o, half, half).trace().real();
    if (p < 1e-14) {
        throw NumericalError("conditional state undefined for a zero-probability outcome",
                             "p=" + std::to_string(p));
    }
    SelectiveResult r{p, DensityOperator{Eigen::MatrixXcd::Zero(rho.matrix.rows(), rho.matrix.cols()), L}};
    r.rho.matrix.block(o, o, half, half) = rho.matrix.block(o, o, half, half) / p;
    return r;
}

/// <H'> in rho' for the stabilizing Hamiltonian H' = -T ln rho' + F_eq,
/// whose Gibbs state is rho' and which equals H when rho' is the Gibbs
/// state of H. This is F_eq + T S(rho'); at T = 0 it is F_eq.
inline double stabilizing_energy(double entropy_after, double free_energy_eq, double T) {
    require(T >= 0.0, "temperature must be >= 0");
    return free_energy_eq + T * entropy_after;
}

/// Matrix form of H' (finite T only).
inline Eigen::MatrixXcd stabilizing_hamiltonian(const DensityOperator &rho, double free_energy_eq, double T) {
    require(T > 0.0, "the stabilizing Hamiltonian is defined at T > 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix);
    Eigen::VectorXd h(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = -T * std::log(std::max(es.eigenvalues()(i), 1e-15)) + free_energy_eq;
    return es.eigenvectors() * h.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qndwork::exactsim
