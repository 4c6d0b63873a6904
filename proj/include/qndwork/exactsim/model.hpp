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
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qndwork/bath.hpp"
#include "qndwork/error.hpp"
#include "qndwork/modulation.hpp"

namespace qndwork::exactsim {

using SparseOp = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Star discretization of the Lorentzian: equal-width bins over
/// [omega0 - span/tc, omega0 + span/tc], one mode per bin at the bin center,
/// g_k^2 = (1/2pi) * integral of G_0 over the bin.
struct BathModes {
    std::vector<double> freqs;
    std::vector<double> couplings;
    /// Set when the requested window reached below w = 0 and was clamped.
    std::optional<std::string> warning;
};

/// (1/2pi) integral of G_0 over [a, b], a >= 0.
inline double lorentzian_weight(const BathSpec &b, double lo, double hi) {
    return b.eta * b.eta * (std::atan((hi - b.omega0) * b.tc) - std::atan((lo - b.omega0) * b.tc)) /
           (2.0 * std::numbers::pi);
}

inline BathModes discretize_bath(const BathSpec &b, int n_modes, double span_widths = 4.0) {
    validate(b);
    require(n_modes >= 1, "n_modes must be >= 1");
    require(span_widths > 0.0, "span must be > 0");
    BathModes out;
    double lo = b.omega0 - span_widths / b.tc;
    const double hi = b.omega0 + span_widths / b.tc;
    if (lo < 0.0) {
        out.warning = "mode window clamped at w = 0 (requested lower edge " + std::to_string(lo) + ")";
        lo = 0.0;
    }
    const double width = (hi - lo) / n_modes;
    for (int k = 0; k < n_modes; ++k) {
        const double a = lo + k * width;
        const double c = a + width;
        out.freqs.push_back(0.5 * (a + c));
        out.couplings.push_back(std::sqrt(lorentzian_weight(b, a, c)));
    }
    return out;
}

/// Instantaneous projective measurement, or the finite CNOT pulse
/// h(t) = (pi / 4 tau_m) (tanh^2((t - t_m)/tau_m) - 1).
struct PulseSpec {
    double t_m = 0.0;
    double tau_m = 1e-3;
    bool instantaneous = true;
};

struct Discretization {
    int n_modes = 5;
    int fock_cutoff = 2;
    double span_widths = 4.0;
    /// Optional cap on the total number of bath quanta.
    std::optional<int> max_excitations;
    std::size_t dimension_cap = 4096;
};

/// Qubit S, optional probe P (H_P = 0) and N bosonic modes B:
///     H(t) = w(t) sz/2 + sum_k w_k a_k^+ a_k + sx (x) sum_k g_k (a_k + a_k^+)
///            + h(t) |e><e| (x) (I - sx_P).
struct SupersystemModel {
    DriveSpec drive;
    BathSpec bath;
    std::vector<double> mode_freqs;
    std::vector<double> couplings;
    int fock_cutoff = 2;
    std::optional<int> max_excitations;
    bool include_probe = false;
    /// Phase reference for plotting S-P coherences only; H_P = 0.
    double probe_freq = 0.0;
    PulseSpec pulse;
    std::size_t dimension_cap = 4096;

    int n_modes() const noexcept {
        return static_cast<int>(mode_freqs.size());
    }
};

inline SupersystemModel make_model(const BathSpec &bath, const DriveSpec &drive, const Discretization &disc,
                                   bool include_probe = false, PulseSpec pulse = {}) {
    validate(drive);
    require(disc.fock_cutoff >= 1, "fock_cutoff must be >= 1");
    require(!disc.max_excitations || *disc.max_excitations >= 1, "max_excitations must be >= 1");
    BathModes modes = discretize_bath(bath, disc.n_modes, disc.span_widths);
    SupersystemModel m;
    m.drive = drive;
    m.bath = bath;
    m.mode_freqs = std::move(modes.freqs);
    m.couplings = std::move(modes.couplings);
    m.fock_cutoff = disc.fock_cutoff;
    m.max_excitations = disc.max_excitations;
    m.include_probe = include_probe;
    m.probe_freq = 10.0 / 7.0 * drive.omega_a;
    m.pulse = pulse;
    m.dimension_cap = disc.dimension_cap;
    return m;
}

/// Occupation-number basis of the truncated bath.
class BathBasis {
   public:
    BathBasis(int n_modes, int cutoff, std::optional<int> max_excitations) : n_modes_(n_modes) {
        std::vector<int> occ(n_modes, 0);
        const int cap = max_excitations.value_or(n_modes * cutoff);
        enumerate(occ, 0, 0, cutoff, cap);
        for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], static_cast<int>(i));
    }

    /// Number of basis states, without building them.
    static std::size_t count(int n_modes, int cutoff, std::optional<int> max_excitations) {
        const int cap = max_excitations.value_or(n_modes * cutoff);
        // ways[q] = number of occupation vectors over the modes seen so far with q quanta.
        std::vector<std::size_t> ways(cap + 1, 0);
        ways[0] = 1;
        for (int k = 0; k < n_modes; ++k) {
            std::vector<std::size_t> next(cap + 1, 0);
            for (int q = 0; q <= cap; ++q) {
                for (int n = 0; n <= cutoff && q + n <= cap; ++n) next[q + n] += ways[q];
            }
            ways = std::move(next);
        }
        std::size_t total = 0;
        for (std::size_t w : ways) total += w;
        return total;
    }

    std::size_t size() const noexcept {
        return states_.size();
    }
    int n_modes() const noexcept {
        return n_modes_;
    }
    const std::vector<int> &occupations(std::size_t i) const {
        return states_[i];
    }
    /// Index of an occupation vector, or -1 when it is truncated away.
    int find(const std::vector<int> &occ) const {
        auto it = index_.find(occ);
        return it == index_.end() ? -1 : it->second;
    }

   private:
    void enumerate(std::vector<int> &occ, int mode, int used, int cutoff, int cap) {
        if (mode == n_modes_) {
            states_.push_back(occ);
            return;
        }
        for (int n = 0; n <= cutoff && used + n <= cap; ++n) {
            occ[mode] = n;
            enumerate(occ, mode + 1, used + n, cutoff, cap);
        }
        occ[mode] = 0;
    }

    int n_modes_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, int> index_;
};

/// Index layout (s, p, m) -> (s * P + p) * M + m with s = 0 for |g>,
/// s = 1 for |e>, P = 2 with a probe and 1 without.
struct Layout {
    std::shared_ptr<const BathBasis> bath;
    bool probe = false;

    std::size_t probe_dim() const noexcept {
        return probe ? 2 : 1;
    }
    std::size_t bath_dim() const noexcept {
        return bath->size();
    }
    std::size_t dim() const noexcept {
        return 2 * probe_dim() * bath_dim();
    }
    std::size_t index(int s, int p, std::size_t m) const noexcept {
        return (static_cast<std::size_t>(s) * probe_dim() + static_cast<std::size_t>(p)) * bath_dim() + m;
    }
};

/// Static pieces of H(t) on one layout.
struct Operators {
    Layout layout;
    SparseOp sz_half;      // sz/2 on S
    SparseOp h_bath;       // sum_k w_k n_k
    SparseOp h_sb;         // sx (x) B
    SparseOp probe_flip;   // |e><e| (x) (I - sx_P); empty without probe
    SparseOp dh_dt_unit;   // d H_S / d w = sz/2 (same as sz_half)
};

inline std::size_t model_dimension(const SupersystemModel &m, bool with_probe) {
    return 2 * (with_probe ? 2 : 1) * BathBasis::count(m.n_modes(), m.fock_cutoff, m.max_excitations);
}

inline void check_dimension(const SupersystemModel &m, bool with_probe) {
    const std::size_t d = model_dimension(m, with_probe);
    if (d > m.dimension_cap) {
        throw ConfigError("Hilbert dimension " + std::to_string(d) + " exceeds the dimension cap " +
                          std::to_string(m.dimension_cap) + "; a cap of at least " + std::to_string(d) +
                          " is required");
    }
}

inline Operators build_operators(const SupersystemModel &m, bool with_probe) {
    check_dimension(m, with_probe);
    Operators ops;
    ops.layout.bath = std::make_shared<BathBasis>(m.n_modes(), m.fock_cutoff, m.max_excitations);
    ops.layout.probe = with_probe;
    const Layout &L = ops.layout;
    const std::size_t D = L.dim();
    const std::size_t M = L.bath_dim();
    const int P = static_cast<int>(L.probe_dim());

    // Bath coupling operator B on the bath space.
    std::vector<Eigen::Triplet<double>> bt;
    std::vector<double> bath_energy(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const std::vector<int> &occ = L.bath->occupations(i);
        for (int k = 0; k < m.n_modes(); ++k) {
            bath_energy[i] += m.mode_freqs[k] * occ[k];
            std::vector<int> up = occ;
            up[k] += 1;
            const int j = L.bath->find(up);
            if (up[k] <= m.fock_cutoff && j >= 0) {
                const double amp = m.couplings[k] * std::sqrt(static_cast<double>(up[k]));
                bt.emplace_back(j, static_cast<int>(i), amp);
                bt.emplace_back(static_cast<int>(i), j, amp);
            }
        }
    }

    std::vector<Eigen::Triplet<double>> sz, hb, sb, pf;
    for (int s = 0; s < 2; ++s) {
        for (int p = 0; p < P; ++p) {
            for (std::size_t mm = 0; mm < M; ++mm) {
                const auto row = static_cast<int>(L.index(s, p, mm));
                sz.emplace_back(row, row, s == 1 ? 0.5 : -0.5);
                hb.emplace_back(row, row, bath_energy[mm]);
            }
        }
    }
    for (const auto &t : bt) {
        for (int p = 0; p < P; ++p) {
            // sx flips the qubit: |g><e| + |e><g|.
            sb.emplace_back(static_cast<int>(L.index(0, p, t.row())), static_cast<int>(L.index(1, p, t.col())), t.value());
            sb.emplace_back(static_cast<int>(L.index(1, p, t.row())), static_cast<int>(L.index(0, p, t.col())), t.value());
        }
    }
    if (with_probe) {
        for (std::size_t mm = 0; mm < M; ++mm) {
            for (int p = 0; p < 2; ++p) {
                const auto row = static_cast<int>(L.index(1, p, mm));
                pf.emplace_back(row, row, 1.0);
                pf.emplace_back(row, static_cast<int>(L.index(1, 1 - p, mm)), -1.0);
            }
        }
    }
    auto make = [D](const std::vector<Eigen::Triplet<double>> &trip) {
        SparseOp op(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
        op.setFromTriplets(trip.begin(), trip.end());
        op.makeCompressed();
        return op;
    };
    ops.sz_half = make(sz);
    ops.h_bath = make(hb);
    ops.h_sb = make(sb);
    ops.probe_flip = make(pf);
    ops.dh_dt_unit = ops.sz_half;
    return ops;
}

}  // namespace qndwork::exactsim
