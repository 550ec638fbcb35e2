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

#ifndef SECMIMO_MONTECARLO_HPP
#define SECMIMO_MONTECARLO_HPP

#include "metrics.hpp"

#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

namespace secmimo {

/// One Monte Carlo run: a configuration, a scheme, and a seeded trial count.
/// Trial t always consumes RNG stream (master_seed, t), so results are
/// independent of thread count and execution order.
struct EnsembleSpec {
    SystemConfig cfg;
    Scheme scheme = Scheme::HZF;
    int n_trials = 5000;
    std::uint64_t master_seed = 1;

    bool compute_eve = true; // requires L-K > M and phi < 1
    int num_threads = 0;     // 0 = hardware concurrency
    double ins_tol = default_ins_tol;
    int ins_max_iter = default_ins_max_iter;
};

struct TrialFailure {
    int trial;
    std::string reason;
};

struct EnsembleResult {
    std::vector<TermStats> stats; // per MT
    double eve_capacity_mc = NAN;
    double eve_capacity_mc_se = NAN;
    double secrecy_mc_se = NAN; // jackknife over trials
    RateReport rate_report;
    int n_retained = 0;
    std::vector<TrialFailure> failures;
    bool unreliable = false;  // more than 1% of trials dropped
    RVector footnote_term;    // per MT: relative variance of the signal gain
};

/// The channel realization trial t of a run would see; all schemes sharing a
/// master seed are paired on identical channels.
inline ChannelRealization trial_channels(const EnsembleSpec &spec, int t) {
    RngStream rng(spec.master_seed, static_cast<std::uint64_t>(t));
    return generate_channels(spec.cfg, rng);
}

namespace detail {

struct TrialData {
    bool ok = false;
    std::string fail_reason;
    RVector signal_amp;          // |h_k^H F w_k| per MT
    RVector signal_power;        // squared
    Eigen::MatrixXd interference; // K x (K-1), |h_k^H F w_l|^2 for l != k
    RVector an_leakage;          // h_k^H A V V^H A^H h_k
    double eve_log = 0.0;        // mean over MTs of log2(1 + gamma_e^k)
};

inline TrialData run_trial(const EnsembleSpec &spec, int t) {
    const SystemConfig &cfg = spec.cfg;
    const int k_mt = cfg.num_terminals;

    TrialData data;
    try {
        RngStream rng(spec.master_seed, static_cast<std::uint64_t>(t));
        const ChannelRealization ch = generate_channels(cfg, rng);
        const BuildResult build =
            build_precoders(spec.scheme, ch.H_hat, cfg, rng, spec.ins_tol, spec.ins_max_iter);
        if (build.ins && !build.ins->all_converged) {
            data.fail_reason = "ins-non-convergence";
            return data;
        }
        const PrecoderSet &pre = build.set;

        // Effective transmit matrices; F = A = I for the full-digital schemes.
        const bool full = is_full_digital(spec.scheme);
        const CMatrix D = full ? pre.W : CMatrix(pre.F * pre.W); // N x K
        const CMatrix S = full ? pre.V : CMatrix(pre.A * pre.V); // N x L3

        data.signal_amp.resize(k_mt);
        data.signal_power.resize(k_mt);
        data.interference.resize(k_mt, k_mt - 1);
        data.an_leakage.resize(k_mt);
        for (int k = 0; k < k_mt; ++k) {
            const Eigen::RowVectorXcd row = ch.H.col(k).adjoint() * D;
            const double amp = std::abs(row(k));
            data.signal_amp(k) = amp;
            data.signal_power(k) = amp * amp;
            int slot = 0;
            for (int l = 0; l < k_mt; ++l)
                if (l != k) data.interference(k, slot++) = std::norm(row(l));
            data.an_leakage(k) = (ch.H.col(k).adjoint() * S).squaredNorm();
        }

        if (spec.compute_eve) {
            const CMatrix Xe = ch.G_E.adjoint() * S;  // M x L3
            const CMatrix gram = Xe * Xe.adjoint();
            Eigen::LLT<CMatrix> llt(gram);
            if (llt.info() != Eigen::Success) {
                data.fail_reason = "eve-gram-singular";
                return data;
            }
            const CMatrix Ye = ch.G_E.adjoint() * D; // M x K
            const double scale =
                pre.an_streams * cfg.phi / (k_mt * (1.0 - cfg.phi));
            double acc = 0.0;
            for (int k = 0; k < k_mt; ++k) {
                const CVector y = Ye.col(k);
                acc += rate_from_sinr(scale * y.dot(llt.solve(y)).real());
            }
            data.eve_log = acc / k_mt;
        }

        const bool finite = data.signal_amp.allFinite() && data.interference.allFinite() &&
                            data.an_leakage.allFinite() && std::isfinite(data.eve_log);
        if (!finite) {
            data.fail_reason = "non-finite";
            return data;
        }
        data.ok = true;
    } catch (const std::exception &e) {
        data.fail_reason = e.what();
    }
    return data;
}

inline double sample_se(const std::vector<double> &xs, double mean) {
    const std::size_t n = xs.size();
    if (n < 2) return NAN;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (static_cast<double>(n - 1) * static_cast<double>(n)));
}

} // namespace detail

/// Runs the full ensemble: per-trial channel generation, precoder
/// construction and term accumulation, followed by an ordered reduction so
/// the result is bit-identical for any worker count. Trials that fail (INS
/// non-convergence, singular draws) are dropped and counted; more than 1%
/// drops flags the result as unreliable.
inline EnsembleResult run_ensemble(const EnsembleSpec &spec) {
    if (spec.n_trials < 1) throw std::invalid_argument("run_ensemble: n_trials must be >= 1");
    require_valid(spec.cfg, spec.compute_eve);
    if (spec.compute_eve && !(spec.cfg.phi < 1.0))
        throw std::invalid_argument("run_ensemble: Eve metrics need phi < 1");

    const SystemConfig &cfg = spec.cfg;
    const int n = spec.n_trials;
    const int k_mt = cfg.num_terminals;

    std::vector<detail::TrialData> trials(static_cast<std::size_t>(n));
    int want = spec.num_threads > 0 ? spec.num_threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    want = std::max(1, std::min(want, n));
    if (want == 1) {
        for (int t = 0; t < n; ++t) trials[static_cast<std::size_t>(t)] = detail::run_trial(spec, t);
    } else {
        std::atomic<int> next{0};
        auto work = [&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= n) break;
                trials[static_cast<std::size_t>(t)] = detail::run_trial(spec, t);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(want));
        for (int i = 0; i < want; ++i) pool.emplace_back(work);
        for (auto &th : pool) th.join();
    }

    EnsembleResult res;
    for (int t = 0; t < n; ++t)
        if (!trials[static_cast<std::size_t>(t)].ok)
            res.failures.push_back({t, trials[static_cast<std::size_t>(t)].fail_reason});
    res.n_retained = n - static_cast<int>(res.failures.size());
    res.unreliable = static_cast<double>(res.failures.size()) > 0.01 * n;
    if (res.n_retained == 0)
        throw std::runtime_error("run_ensemble: every trial failed (" +
                                 (res.failures.empty() ? std::string("?") : res.failures[0].reason) +
                                 ")");

    // Ordered reduction: means first, then a second pass for standard errors.
    const double nr = res.n_retained;
    res.stats.assign(static_cast<std::size_t>(k_mt), TermStats{});
    RVector sum_amp = RVector::Zero(k_mt), sum_pow = RVector::Zero(k_mt),
            sum_leak = RVector::Zero(k_mt);
    Eigen::MatrixXd sum_intf = Eigen::MatrixXd::Zero(k_mt, std::max(0, k_mt - 1));
    double sum_eve = 0.0;
    for (const auto &tr : trials) {
        if (!tr.ok) continue;
        sum_amp += tr.signal_amp;
        sum_pow += tr.signal_power;
        sum_leak += tr.an_leakage;
        sum_intf += tr.interference;
        sum_eve += tr.eve_log;
    }

    RVector var_amp = RVector::Zero(k_mt), var_leak = RVector::Zero(k_mt);
    Eigen::MatrixXd var_intf = Eigen::MatrixXd::Zero(k_mt, std::max(0, k_mt - 1));
    double var_eve = 0.0;
    const RVector mean_amp = sum_amp / nr, mean_pow = sum_pow / nr, mean_leak = sum_leak / nr;
    const Eigen::MatrixXd mean_intf = sum_intf / nr;
    const double mean_eve = sum_eve / nr;
    for (const auto &tr : trials) {
        if (!tr.ok) continue;
        var_amp.array() += (tr.signal_amp - mean_amp).array().square();
        var_leak.array() += (tr.an_leakage - mean_leak).array().square();
        var_intf.array() += (tr.interference - mean_intf).array().square();
        var_eve += (tr.eve_log - mean_eve) * (tr.eve_log - mean_eve);
    }
    const double se_scale = res.n_retained > 1 ? 1.0 / ((nr - 1.0) * nr) : NAN;

    res.footnote_term.resize(k_mt);
    for (int k = 0; k < k_mt; ++k) {
        TermStats &st = res.stats[static_cast<std::size_t>(k)];
        st.signal_amp = mean_amp(k);
        st.signal_amp_se = std::sqrt(var_amp(k) * se_scale);
        st.an_leakage = mean_leak(k);
        st.an_leakage_se = std::sqrt(var_leak(k) * se_scale);
        st.interference = mean_intf.row(k);
        st.interference_se = (var_intf.row(k) * se_scale).array().sqrt();
        const double m1 = mean_amp(k);
        res.footnote_term(k) =
            res.n_retained > 1 && m1 > 0.0
                ? (mean_pow(k) - m1 * m1) * (nr / (nr - 1.0)) / (m1 * m1)
                : NAN;
    }

    if (spec.compute_eve) {
        res.eve_capacity_mc = mean_eve;
        res.eve_capacity_mc_se = std::sqrt(var_eve * se_scale);
    }

    // Assemble the rate report.
    RateReport &rep = res.rate_report;
    rep.scheme = spec.scheme;
    rep.phi = cfg.phi;
    rep.terminals.resize(static_cast<std::size_t>(k_mt));
    for (int k = 0; k < k_mt; ++k) {
        auto &pt = rep.terminals[static_cast<std::size_t>(k)];
        pt.sinr_cf = closed_form_sinr(spec.scheme, cfg, k);
        pt.rate_cf = rate_from_sinr(pt.sinr_cf);
        pt.sinr_mc = mt_sinr_from_stats(res.stats[static_cast<std::size_t>(k)], cfg, k);
        pt.rate_mc = rate_from_sinr(pt.sinr_mc);
    }
    if (spec.compute_eve) {
        rep.eve_bound = eve_capacity_bound(cfg);
        rep.eve_mc = res.eve_capacity_mc;
        double cf = 0.0, mc = 0.0;
        for (const auto &pt : rep.terminals) {
            cf += clamp_nonneg(pt.rate_cf - rep.eve_bound);
            mc += clamp_nonneg(pt.rate_mc - rep.eve_bound);
        }
        rep.secrecy_cf = cf / k_mt;
        rep.secrecy_mc = mc / k_mt;

        // Jackknife stderr for secrecy_mc: it is a nonlinear function of the
        // per-trial means, so delete-one resampling propagates the error.
        if (res.n_retained > 1) {
            std::vector<double> sec;
            sec.reserve(static_cast<std::size_t>(res.n_retained));
            for (const auto &tr : trials) {
                if (!tr.ok) continue;
                double acc = 0.0;
                for (int k = 0; k < k_mt; ++k) {
                    TermStats st;
                    st.signal_amp = (sum_amp(k) - tr.signal_amp(k)) / (nr - 1.0);
                    st.interference = (sum_intf.row(k) - tr.interference.row(k)) / (nr - 1.0);
                    st.an_leakage = (sum_leak(k) - tr.an_leakage(k)) / (nr - 1.0);
                    acc += clamp_nonneg(rate_from_sinr(mt_sinr_from_stats(st, cfg, k)) -
                                        rep.eve_bound);
                }
                sec.push_back(acc / k_mt);
            }
            double jk_mean = 0.0;
            for (double s : sec) jk_mean += s;
            jk_mean /= static_cast<double>(sec.size());
            double ss = 0.0;
            for (double s : sec) ss += (s - jk_mean) * (s - jk_mean);
            res.secrecy_mc_se = std::sqrt((nr - 1.0) / nr * ss);
        }
    }
    return res;
}

/// The footnote variance term (E[X^2]-E[X]^2)/E[X]^2 with X = |h_k^H F w_k|,
/// per MT: the SINR derivation replaces E[X^2] by E[X]^2, and this ratio
/// tracks how fast that gap closes with N.
inline RVector estimate_footnote_term(const EnsembleSpec &spec) {
    if (spec.n_trials < 2)
        throw std::invalid_argument("estimate_footnote_term: needs at least 2 trials");
    return run_ensemble(spec).footnote_term;
}

} // namespace secmimo

#endif // SECMIMO_MONTECARLO_HPP
