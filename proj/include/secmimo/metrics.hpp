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

#ifndef SECMIMO_METRICS_HPP
#define SECMIMO_METRICS_HPP

#include "channel.hpp"
#include "precoder.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace secmimo {

inline double rate_from_sinr(double sinr) { return std::log2(1.0 + sinr); }

inline double clamp_nonneg(double x) { return x > 0.0 ? x : 0.0; }

/// Monte Carlo estimates of one MT's SINR ingredients, in small-scale channel
/// units (path loss enters the SINR as sigma^2/beta_k): the signal amplitude
/// E[|h_k^H F w_k|], the K-1 interference powers E[|h_k^H F w_l|^2], and the
/// AN leakage E[h_k^H A V V^H A^H h_k].
struct TermStats {
    double signal_amp = 0.0;
    double signal_amp_se = 0.0;
    RVector interference;    // length K-1, ordered by l skipping k
    RVector interference_se; // same layout
    double an_leakage = 0.0;
    double an_leakage_se = 0.0;
};

/// Assembles the MT SINR from the three expectation terms:
/// (phi P / K) signal^2 over the sum of multiuser interference, AN leakage
/// weighted by (1-phi) P / L3, and sigma^2/beta_k.
inline double mt_sinr_from_stats(const TermStats &stats, const SystemConfig &cfg, int k) {
    if (!std::isfinite(stats.signal_amp) || !stats.interference.allFinite() ||
        !std::isfinite(stats.an_leakage))
        throw std::invalid_argument("mt_sinr_from_stats: non-finite statistics");

    const double data_power = cfg.phi * cfg.power / cfg.num_terminals;
    const double an_power =
        cfg.an_streams() > 0 ? (1.0 - cfg.phi) * cfg.power / cfg.an_streams() : 0.0;

    double denom = data_power * stats.interference.sum() + an_power * stats.an_leakage +
                   cfg.noise_power / cfg.beta(k);
    if (!(denom > 0.0))
        throw std::invalid_argument("mt_sinr_from_stats: zero denominator");
    return data_power * stats.signal_amp * stats.signal_amp / denom;
}

/// Instantaneous SINR of a noiseless Eve extracting MT k's stream,
/// (L3 phi / (K (1-phi))) w_k^H F^H G_E (G_E^H A V V^H A^H G_E)^-1 G_E^H F w_k.
inline double eve_sinr(const PrecoderSet &pre, const CMatrix &G_E, const SystemConfig &cfg,
                       int k) {
    const int m = static_cast<int>(G_E.cols());
    if (m < 1) throw std::invalid_argument("eve_sinr: Eve has no antennas");
    if (pre.an_streams < m)
        throw singular_matrix_error("eve_sinr: fewer AN streams than Eve antennas", INFINITY);
    if (!(cfg.phi < 1.0))
        throw std::domain_error("eve_sinr: undefined at phi = 1 (no AN power)");

    const CMatrix X = G_E.adjoint() * (pre.A * pre.V); // M x L3
    const CMatrix gram = X * X.adjoint();              // M x M

    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(emax > 0.0) || !(emin > emax * 1e-12))
        throw singular_matrix_error("eve_sinr: AN Gram matrix at Eve is singular",
                                    emin > 0.0 ? emax / emin : INFINITY);

    const CVector y = G_E.adjoint() * (pre.F * pre.W.col(k));
    const double quad = y.dot(gram.llt().solve(y)).real();
    const double scale =
        pre.an_streams * cfg.phi / (cfg.num_terminals * (1.0 - cfg.phi));
    return scale * quad;
}

/// Asymptotic (N -> infinity) SINR of MT k for each scheme. The rows use the
/// imperfect-CSI quality lambda_k; lambda_k = 1 reduces them to perfect CSI.
inline double closed_form_sinr(Scheme scheme, const SystemConfig &cfg, int k) {
    require_valid(cfg, false);
    const double n = cfg.num_antennas;
    const double l = cfg.num_rf_chains;
    const double kk = cfg.num_terminals;
    const double lam = cfg.lambda(k);
    const double data_power = cfg.phi * cfg.power / kk;
    const double an_term = (1.0 - cfg.phi) * cfg.power * (1.0 - lam);
    const double noise = cfg.noise_power / cfg.beta(k);

    double num = 0.0, denom = 0.0;
    switch (scheme) {
        case Scheme::ANA:
            num = data_power * (M_PI / 4.0 * lam * n);
            denom = data_power * (kk - 1.0) + an_term + noise;
            break;
        case Scheme::HMF:
            num = data_power * (M_PI / 4.0 * lam * (n - 1.0) + l);
            denom = data_power * 2.0 * (kk - 1.0) + an_term + noise;
            break;
        case Scheme::HZF:
            num = data_power * (M_PI / 4.0 * lam * (n - 1.0));
            denom = data_power * (kk - 1.0) * (1.0 - lam) + an_term + noise;
            break;
        case Scheme::FMF:
            num = data_power * (lam * n);
            denom = data_power * (kk - 1.0) + an_term + noise;
            break;
        case Scheme::FZF:
            num = data_power * (lam * (n - kk));
            denom = data_power * (kk - 1.0) * (1.0 - lam) + an_term + noise;
            break;
    }
    return num / denom;
}

/// Closed-form upper bound on Eve's capacity, identical for all schemes:
/// log2(1 + phi M / (K (1-phi) (1 - M/(L-K)))). Requires L-K > M and
/// phi in (0,1).
inline double eve_capacity_bound(const SystemConfig &cfg) {
    const double m = cfg.num_eve_antennas;
    const double l3 = cfg.an_streams();
    if (!(l3 > m))
        throw std::domain_error("eve_capacity_bound: requires L-K > M");
    if (!(cfg.phi > 0.0 && cfg.phi < 1.0))
        throw std::domain_error("eve_capacity_bound: requires phi in (0,1)");
    const double arg =
        cfg.phi * m / (cfg.num_terminals * (1.0 - cfg.phi) * (1.0 - m / l3));
    return std::log2(1.0 + arg);
}

/// Closed-form lower bound on the ergodic secrecy rate of MT k,
/// [log2(1 + SINR_k) - C_E_bound]^+.
inline double secrecy_rate_bound(Scheme scheme, const SystemConfig &cfg, int k) {
    return clamp_nonneg(rate_from_sinr(closed_form_sinr(scheme, cfg, k)) -
                        eve_capacity_bound(cfg));
}

/// Evaluates all five closed forms at one operating point and reports whether
/// the large-N ordering claims hold there. The HZF/HMF comparison also checks
/// the threshold gamma_HZF > L/((1+lambda)(K-1)), which is algebraically
/// equivalent given the closed forms.
struct OrderingReport {
    double sinr_ana = 0, sinr_hmf = 0, sinr_hzf = 0, sinr_fmf = 0, sinr_fzf = 0;
    bool fzf_gt_hzf_gt_ana = false;
    bool fmf_gt_ana_gt_hmf = false;
    bool hzf_gt_hmf = false;
    double hzf_hmf_threshold = 0.0;
    bool threshold_consistent = false; // (hzf > hmf) == (hzf > threshold)
};

inline OrderingReport ordering_check(const SystemConfig &cfg, int k = 0) {
    OrderingReport r;
    r.sinr_ana = closed_form_sinr(Scheme::ANA, cfg, k);
    r.sinr_hmf = closed_form_sinr(Scheme::HMF, cfg, k);
    r.sinr_hzf = closed_form_sinr(Scheme::HZF, cfg, k);
    r.sinr_fmf = closed_form_sinr(Scheme::FMF, cfg, k);
    r.sinr_fzf = closed_form_sinr(Scheme::FZF, cfg, k);
    r.fzf_gt_hzf_gt_ana = r.sinr_fzf > r.sinr_hzf && r.sinr_hzf > r.sinr_ana;
    r.fmf_gt_ana_gt_hmf = r.sinr_fmf > r.sinr_ana && r.sinr_ana > r.sinr_hmf;
    r.hzf_gt_hmf = r.sinr_hzf > r.sinr_hmf;
    const double lam = cfg.lambda(k);
    r.hzf_hmf_threshold =
        cfg.num_terminals > 1
            ? cfg.num_rf_chains / ((1.0 + lam) * (cfg.num_terminals - 1.0))
            : 0.0;
    r.threshold_consistent =
        cfg.num_terminals <= 1 || (r.hzf_gt_hmf == (r.sinr_hzf > r.hzf_hmf_threshold));
    return r;
}

/// Per-run rate summary: closed forms next to their Monte Carlo estimates.
/// secrecy_mc is the MC estimate of the secrecy lower bound, i.e. the MC MT
/// rate against the analytic Eve bound; eve_mc carries the simulated
/// E[log2(1+gamma_e)] for comparison against that bound.
struct RateReport {
    Scheme scheme{};
    struct PerTerminal {
        double sinr_cf = 0, rate_cf = 0;
        double sinr_mc = 0, rate_mc = 0;
    };
    std::vector<PerTerminal> terminals;
    double eve_bound = NAN;
    double eve_mc = NAN;
    double secrecy_cf = NAN;
    double secrecy_mc = NAN;
    double phi = NAN;
};

} // namespace secmimo

#endif // SECMIMO_METRICS_HPP
