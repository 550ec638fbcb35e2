// SPDX-License-Identifier: Apache-2.0
//
// secmimo - link-level simulator for secure multiuser massive MIMO downlinks
// with limited RF chains
// Copyright (C) 2026 the secmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SECMIMO_OPTIMIZER_HPP
#define SECMIMO_OPTIMIZER_HPP

#include "metrics.hpp"

#include <utility>
#include <vector>

namespace secmimo {

/// One-dimensional search for the power split maximizing the closed-form
/// secrecy-rate lower bound. The grid covers {step, 2*step, ..., 1-step};
/// refine adds a golden-section pass around the best grid point.
struct PhiSearchSpec {
    SystemConfig cfg; // phi field is ignored
    Scheme scheme = Scheme::HZF;
    double grid_step = 0.01;
    bool refine = false;
    int terminal = 0;
};

struct PhiSearchResult {
    double phi_star = 0.0;
    double secrecy_star = 0.0;
    std::vector<std::pair<double, double>> curve; // (phi, secrecy) on the grid
    bool zero_secrecy = false;                    // bound dominated everywhere
};

inline PhiSearchResult optimize_phi(const PhiSearchSpec &spec) {
    if (!(spec.grid_step > 0.0 && spec.grid_step <= 0.1))
        throw std::invalid_argument("optimize_phi: grid_step must be in (0, 0.1]");
    SystemConfig cfg = spec.cfg;
    cfg.phi = 0.5; // placeholder so config validation sees a legal value
    require_valid(cfg, true);

    auto bound_at = [&](double phi) {
        SystemConfig c = cfg;
        c.phi = phi;
        return secrecy_rate_bound(spec.scheme, c, spec.terminal);
    };

    PhiSearchResult res;
    const double step = spec.grid_step;
    for (int i = 1;; ++i) {
        const double phi = i * step;
        if (phi > 1.0 - step + 1e-12) break;
        res.curve.emplace_back(phi, bound_at(phi));
    }
    if (res.curve.empty()) throw std::invalid_argument("optimize_phi: empty grid");

    // Argmax with ties broken toward smaller phi (more AN at equal secrecy).
    std::size_t best = 0;
    for (std::size_t i = 1; i < res.curve.size(); ++i)
        if (res.curve[i].second > res.curve[best].second) best = i;
    res.phi_star = res.curve[best].first;
    res.secrecy_star = res.curve[best].second;
    res.zero_secrecy = !(res.secrecy_star > 0.0);

    if (spec.refine && !res.zero_secrecy) {
        double lo = std::max(res.phi_star - step, step * 1e-3);
        double hi = std::min(res.phi_star + step, 1.0 - 1e-9);
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - gr * (hi - lo);
        double d = lo + gr * (hi - lo);
        double fc = bound_at(c), fd = bound_at(d);
        while (hi - lo > 1e-7) {
            if (fc > fd) {
                hi = d; d = c; fd = fc;
                c = hi - gr * (hi - lo);
                fc = bound_at(c);
            } else {
                lo = c; c = d; fc = fd;
                d = lo + gr * (hi - lo);
                fd = bound_at(d);
            }
        }
        const double phi_ref = 0.5 * (lo + hi);
        const double sec_ref = bound_at(phi_ref);
        if (sec_ref > res.secrecy_star) {
            res.phi_star = phi_ref;
            res.secrecy_star = sec_ref;
        }
    }
    return res;
}

} // namespace secmimo

#endif // SECMIMO_OPTIMIZER_HPP
