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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace magbell {

struct SimplexConfig {
    std::size_t max_iterations = 2000;
    double x_tolerance = 1e-8;   // max vertex distance (inf-norm) from the best vertex
    double f_tolerance = 1e-12;  // max value gap from the best vertex
    double initial_step = 0.1;   // offset of the initial vertices along each axis

    void validate() const {
        if (!(x_tolerance >= 0.0) || !(f_tolerance >= 0.0)) fail(ErrorKind::InvalidArgument, "tolerances must be >= 0");
        if (!(initial_step > 0.0)) fail(ErrorKind::InvalidArgument, "initial simplex step must be positive");
    }
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Minimizes `objective` with the classic simplex moves: reflection 1,
/// expansion 2, contraction 0.5, shrink 0.5. Deterministic for a given x0.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                 const std::vector<double>& x0, const SimplexConfig& cfg) {
    cfg.validate();
    constexpr double kReflect = 1.0;
    constexpr double kExpand = 2.0;
    constexpr double kContract = 0.5;
    constexpr double kShrink = 0.5;

    SimplexResult res;
    const auto eval = [&](const std::vector<double>& x) {
        const double f = objective(x);
        ++res.evaluations;
        if (!std::isfinite(f)) {
            fail(ErrorKind::OptimizerAbort, "objective returned a non-finite value after " +
                                                std::to_string(res.evaluations) + " evaluations");
        }
        return f;
    };

    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts{x0};
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(x0);
        pts.back()[i] += cfg.initial_step;
    }
    std::vector<double> fs;
    for (const auto& p : pts) fs.push_back(eval(p));

    std::vector<std::size_t> order(n + 1);
    const auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> p2;
        std::vector<double> f2;
        for (auto k : order) {
            p2.push_back(pts[k]);
            f2.push_back(fs[k]);
        }
        pts = std::move(p2);
        fs = std::move(f2);
    };
    const auto affine = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + t * (x[i] - c[i]);
        return out;
    };

    sort_simplex();
    while (n > 0) {
        double fspread = 0.0;
        double xspread = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            fspread = std::max(fspread, std::abs(fs[k] - fs[0]));
            for (std::size_t i = 0; i < n; ++i) xspread = std::max(xspread, std::abs(pts[k][i] - pts[0][i]));
        }
        if (fspread <= cfg.f_tolerance && xspread <= cfg.x_tolerance) {
            res.converged = true;
            break;
        }
        if (res.iterations >= cfg.max_iterations) break;
        ++res.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
        }
        const auto xr = affine(centroid, pts[n], -kReflect);
        const double fr = eval(xr);
        if (fr < fs[0]) {
            const auto xe = affine(centroid, xr, kExpand);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[n] = xe;
                fs[n] = fe;
            } else {
                pts[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            pts[n] = xr;
            fs[n] = fr;
        } else {
            bool accepted = false;
            if (fr < fs[n]) {
                const auto xc = affine(centroid, xr, kContract);
                const double fc = eval(xc);
                if (fc <= fr) {
                    pts[n] = xc;
                    fs[n] = fc;
                    accepted = true;
                }
            } else {
                const auto xc = affine(centroid, pts[n], kContract);
                const double fc = eval(xc);
                if (fc < fs[n]) {
                    pts[n] = xc;
                    fs[n] = fc;
                    accepted = true;
                }
            }
            if (!accepted) {
                for (std::size_t k = 1; k <= n; ++k) {
                    pts[k] = affine(pts[0], pts[k], kShrink);
                    fs[k] = eval(pts[k]);
                }
            }
        }
        sort_simplex();
    }
    if (n == 0) res.converged = true;
    res.x = pts[0];
    res.f = fs[0];
    return res;
}

}  // namespace magbell
