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

#include "qndwork/bath.hpp"
#include "qndwork/modulation.hpp"

namespace fixtures {

inline constexpr double kOmega0 = 1.0 + 3.0 / 7.0;

/// Lorentzian bath of the main figure, eta chosen for the simulations.
inline qndwork::BathSpec fig1_bath(double eta = 0.2, double beta = 3.74) {
    return {eta, kOmega0, 10.0, beta};
}

inline qndwork::DriveSpec fig1_drive(double t_start = 0.0) {
    return {1.0, 0.25, 2.5, t_start, 0.0};
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace fixtures
