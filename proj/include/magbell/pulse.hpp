// Copyright 2026 The magbell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "magbell/error.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace magbell {

// CRAB detuning coefficients. Frequencies are w_k = 2*pi*k/tau_total, k = 1..N.
struct PulseCoefficients {
    std::vector<double> a;
    std::vector<double> b;
    double tau_total = 0.0;
    double G = 0.0;

    std::size_t n_omega() const { return a.size(); }

    void validate() const {
        if (a.size() != b.size()) fail(ErrorKind::InvalidArgument, "CRAB coefficient lists differ in length");
        if (!(tau_total > 0.0)) fail(ErrorKind::InvalidArgument, "pulse duration must be positive");
    }
};

/// Delta(t) = G * (1 + t (tau - t) * sum_k [a_k cos(w_k t) + b_k sin(w_k t)]).
inline double crab_detuning(double t, const PulseCoefficients& pulse) {
    pulse.validate();
    const double tau = pulse.tau_total;
    if (t < 0.0 || t > tau) {
        fail(ErrorKind::TimeOutOfRange, "t=" + std::to_string(t) + " outside [0, " + std::to_string(tau) + "]");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < pulse.a.size(); ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1) / tau;
        sum += pulse.a[k] * std::cos(w * t) + pulse.b[k] * std::sin(w * t);
    }
    return pulse.G * (1.0 + t * (tau - t) * sum);
}

}  // namespace magbell
