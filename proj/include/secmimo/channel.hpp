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

#ifndef SECMIMO_CHANNEL_HPP
#define SECMIMO_CHANNEL_HPP

#include "numkernel.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace secmimo {

inline double linear_from_db(double db) { return std::pow(10.0, db / 10.0); }

/// MMSE estimation quality lambda = p_tau*tau*beta / (1 + p_tau*tau*beta),
/// the fraction of channel variance captured by the estimate.
inline double derive_lambda(double pilot_power, int pilot_length, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("derive_lambda: path loss beta must be > 0");
    if (pilot_power < 0.0)
        throw std::invalid_argument("derive_lambda: pilot power must be >= 0");
    if (pilot_length < 1)
        throw std::invalid_argument("derive_lambda: pilot length must be >= 1");
    const double x = pilot_power * static_cast<double>(pilot_length) * beta;
    return x / (1.0 + x);
}

/// All scalar system parameters. Transmit powers are linear here; the CLI
/// converts dB inputs on load. Path loss and CSI-quality vectors broadcast
/// from defaults when left empty.
struct SystemConfig {
    int num_antennas = 128;   // N, BS antennas
    int num_rf_chains = 10;   // L, K < L < N
    int num_terminals = 3;    // K, single-antenna MTs
    int num_eve_antennas = 5; // M
    double power = 10.0;      // P, total transmit power budget
    double phi = 0.5;         // data share of P; 1-phi goes to AN
    double pilot_power = 1.0; // p_tau
    int pilot_length = 0;     // tau; 0 means the minimum orthogonal set tau = K
    double noise_power = 1.0; // sigma^2 at each MT
    std::vector<double> path_loss;    // beta_k, empty = all ones
    double eve_path_loss = 1.0;       // beta_E; Eve SINR is invariant to it
    std::vector<double> csi_quality;  // optional lambda override, empty = derive

    int an_streams() const { return num_rf_chains - num_terminals; } // L3 = L - K

    int tau() const { return pilot_length > 0 ? pilot_length : num_terminals; }

    double beta(int k) const {
        return path_loss.empty() ? 1.0 : path_loss.at(static_cast<std::size_t>(k));
    }

    double lambda(int k) const {
        if (!csi_quality.empty()) return csi_quality.at(static_cast<std::size_t>(k));
        return derive_lambda(pilot_power, tau(), beta(k));
    }
};

/// Checks every config invariant and returns the violated ones (empty list =
/// valid). With need_eve_bound the closed-form Eve bound's L-K > M condition
/// is enforced as well.
inline std::vector<std::string> validate_config(const SystemConfig &cfg, bool need_eve_bound) {
    std::vector<std::string> bad;
    const int n = cfg.num_antennas, l = cfg.num_rf_chains, k = cfg.num_terminals;

    if (k < 1) bad.push_back("K >= 1");
    if (!(k < l)) bad.push_back("K < L");
    if (!(l < n)) bad.push_back("L < N");
    if (cfg.num_eve_antennas < 0) bad.push_back("M >= 0");
    if (!(cfg.tau() >= k)) bad.push_back("tau >= K");
    if (!(cfg.phi > 0.0 && cfg.phi <= 1.0)) bad.push_back("phi in (0,1]");
    if (!(cfg.power >= 0.0)) bad.push_back("P >= 0");
    if (!(cfg.pilot_power >= 0.0)) bad.push_back("p_tau >= 0");
    if (!(cfg.noise_power > 0.0)) bad.push_back("sigma2 > 0");
    if (!(cfg.eve_path_loss > 0.0)) bad.push_back("beta_eve > 0");

    if (!cfg.path_loss.empty() && static_cast<int>(cfg.path_loss.size()) != k)
        bad.push_back("beta length == K");
    else
        for (double b : cfg.path_loss)
            if (!(b > 0.0)) { bad.push_back("beta_k > 0"); break; }

    if (!cfg.csi_quality.empty() && static_cast<int>(cfg.csi_quality.size()) != k)
        bad.push_back("lambda length == K");
    else
        for (double q : cfg.csi_quality)
            if (!(q >= 0.0 && q <= 1.0)) { bad.push_back("lambda in [0,1]"); break; }

    if (need_eve_bound && !(l - k > cfg.num_eve_antennas)) bad.push_back("L-K > M");

    return bad;
}

inline void require_valid(const SystemConfig &cfg, bool need_eve_bound) {
    const auto bad = validate_config(cfg, need_eve_bound);
    if (bad.empty()) return;
    std::ostringstream msg;
    msg << "invalid system configuration, violated:";
    for (const auto &b : bad) msg << " [" << b << "]";
    throw std::invalid_argument(msg.str());
}

/// One draw of the small-scale downlink channels. H = H_hat + E exactly;
/// column k of H_hat has per-entry variance lambda_k, column k of E has
/// 1 - lambda_k. G_E carries the sqrt(beta_E) scaling.
struct ChannelRealization {
    CMatrix H_hat; // N x K, MMSE estimates
    CMatrix E;     // N x K, estimation errors
    CMatrix H;     // N x K, true channels
    CMatrix G_E;   // N x M, Eve
    RVector lambda;
};

inline ChannelRealization generate_channels(const SystemConfig &cfg, RngStream &rng) {
    require_valid(cfg, false);
    const int n = cfg.num_antennas, k = cfg.num_terminals, m = cfg.num_eve_antennas;

    ChannelRealization ch;
    ch.lambda.resize(k);
    for (int j = 0; j < k; ++j) ch.lambda(j) = cfg.lambda(j);

    // Unit-variance draws scaled per column, so the consumed random sequence
    // does not depend on lambda.
    ch.H_hat = sample_complex_gaussian(n, k, 1.0, rng);
    ch.E = sample_complex_gaussian(n, k, 1.0, rng);
    for (int j = 0; j < k; ++j) {
        ch.H_hat.col(j) *= std::sqrt(ch.lambda(j));
        ch.E.col(j) *= std::sqrt(1.0 - ch.lambda(j));
    }
    ch.H = ch.H_hat + ch.E;
    ch.G_E = m > 0 ? sample_complex_gaussian(n, m, cfg.eve_path_loss, rng) : CMatrix(n, 0);
    return ch;
}

} // namespace secmimo

#endif // SECMIMO_CHANNEL_HPP
