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

#ifndef SECMIMO_EXPERIMENT_HPP
#define SECMIMO_EXPERIMENT_HPP

#include "montecarlo.hpp"
#include "optimizer.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace secmimo {

class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Locale-independent full-precision number formatting (shortest
/// round-trip decimal form).
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

/// Everything one batch run needs: the scalar system parameters plus the
/// swept axes (N list, L list, phi grid), the scheme list and run controls.
/// Parsed from flat key=value files; *_dB keys are converted on load.
struct ExperimentConfig {
    SystemConfig base;              // N/L/phi fields mirror the first axis entries
    std::vector<int> n_values{128};
    std::vector<int> l_values{10};
    std::vector<double> phi_values{0.5};
    std::vector<Scheme> schemes{Scheme::ANA, Scheme::HMF, Scheme::HZF, Scheme::FMF, Scheme::FZF};
    int n_trials = 5000;
    std::uint64_t master_seed = 1;
    double grid_step = 0.01;
    bool refine = false;
    int num_threads = 0;
    double mc_tolerance_scale = 1.0; // validate only; scales the MC check tolerances
};

namespace detail {

inline std::string trim(const std::string &s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

inline double parse_double(const std::string &s, const std::string &key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw config_error("config: bad numeric value '" + s + "' for key " + key);
    }
}

inline long long parse_int(const std::string &s, const std::string &key) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw config_error("config: bad integer value '" + s + "' for key " + key);
    }
}

inline bool parse_bool(const std::string &s, const std::string &key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw config_error("config: bad boolean value '" + s + "' for key " + key);
}

} // namespace detail

/// Parses the flat key=value config format. Unknown keys are rejected so
/// typos fail loudly instead of running the wrong experiment.
inline ExperimentConfig parse_config(std::istream &in) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(lineno) +
                               " is not of the form key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error("config: line " + std::to_string(lineno) + " has an empty key or value");
        if (kv.count(key)) throw config_error("config: duplicate key " + key);
        kv[key] = val;
    }

    auto take = [&](const char *key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("N"); !v.empty()) {
        cfg.n_values.clear();
        for (const auto &p : detail::split_list(v))
            cfg.n_values.push_back(static_cast<int>(detail::parse_int(p, "N")));
    }
    if (auto v = take("L"); !v.empty()) {
        cfg.l_values.clear();
        for (const auto &p : detail::split_list(v))
            cfg.l_values.push_back(static_cast<int>(detail::parse_int(p, "L")));
    }
    if (auto v = take("phi"); !v.empty()) {
        cfg.phi_values.clear();
        for (const auto &p : detail::split_list(v))
            cfg.phi_values.push_back(detail::parse_double(p, "phi"));
    }
    if (auto v = take("K"); !v.empty())
        cfg.base.num_terminals = static_cast<int>(detail::parse_int(v, "K"));
    if (auto v = take("M"); !v.empty())
        cfg.base.num_eve_antennas = static_cast<int>(detail::parse_int(v, "M"));
    if (auto v = take("P_dB"); !v.empty())
        cfg.base.power = linear_from_db(detail::parse_double(v, "P_dB"));
    if (auto v = take("p_tau_dB"); !v.empty())
        cfg.base.pilot_power = linear_from_db(detail::parse_double(v, "p_tau_dB"));
    if (auto v = take("tau"); !v.empty())
        cfg.base.pilot_length = static_cast<int>(detail::parse_int(v, "tau"));
    if (auto v = take("sigma2"); !v.empty())
        cfg.base.noise_power = detail::parse_double(v, "sigma2");
    if (auto v = take("beta"); !v.empty()) {
        cfg.base.path_loss.clear();
        for (const auto &p : detail::split_list(v))
            cfg.base.path_loss.push_back(detail::parse_double(p, "beta"));
    }
    if (auto v = take("beta_eve"); !v.empty())
        cfg.base.eve_path_loss = detail::parse_double(v, "beta_eve");
    if (auto v = take("lambda"); !v.empty()) {
        cfg.base.csi_quality.clear();
        for (const auto &p : detail::split_list(v))
            cfg.base.csi_quality.push_back(detail::parse_double(p, "lambda"));
    }
    if (auto v = take("schemes"); !v.empty()) {
        cfg.schemes.clear();
        for (const auto &p : detail::split_list(v)) {
            const auto s = parse_scheme(p);
            if (!s) throw config_error("config: unknown scheme '" + p + "'");
            cfg.schemes.push_back(*s);
        }
        if (cfg.schemes.empty()) throw config_error("config: schemes list is empty");
    }
    if (auto v = take("trials"); !v.empty()) {
        cfg.n_trials = static_cast<int>(detail::parse_int(v, "trials"));
        if (cfg.n_trials < 1) throw config_error("config: trials must be >= 1");
    }
    if (auto v = take("seed"); !v.empty())
        cfg.master_seed = static_cast<std::uint64_t>(detail::parse_int(v, "seed"));
    if (auto v = take("grid_step"); !v.empty())
        cfg.grid_step = detail::parse_double(v, "grid_step");
    if (auto v = take("refine"); !v.empty()) cfg.refine = detail::parse_bool(v, "refine");
    if (auto v = take("threads"); !v.empty())
        cfg.num_threads = static_cast<int>(detail::parse_int(v, "threads"));
    if (auto v = take("mc_tolerance_scale"); !v.empty())
        cfg.mc_tolerance_scale = detail::parse_double(v, "mc_tolerance_scale");

    if (!kv.empty()) throw config_error("config: unknown key '" + kv.begin()->first + "'");

    // A scalar beta/lambda broadcasts to all K terminals.
    if (cfg.base.path_loss.size() == 1)
        cfg.base.path_loss.assign(static_cast<std::size_t>(cfg.base.num_terminals),
                                  cfg.base.path_loss[0]);
    if (cfg.base.csi_quality.size() == 1)
        cfg.base.csi_quality.assign(static_cast<std::size_t>(cfg.base.num_terminals),
                                    cfg.base.csi_quality[0]);

    if (!cfg.n_values.empty()) cfg.base.num_antennas = cfg.n_values.front();
    if (!cfg.l_values.empty()) cfg.base.num_rf_chains = cfg.l_values.front();
    if (!cfg.phi_values.empty()) cfg.base.phi = cfg.phi_values.front();
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    return parse_config(in);
}

/// Writes content to path via a temporary file and rename, so failed runs
/// leave no partial output behind.
inline void write_file_atomic(const std::string &path, const std::string &content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file " + tmp);
        out << content;
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("failed writing " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
    }
}

namespace detail {

inline void require_singleton(std::size_t n, const char *what) {
    if (n != 1)
        throw config_error(std::string("config: ") + what +
                           " must be a single value for this command (one sweep axis per run)");
}

inline double mean_rate_cf(const RateReport &r) {
    double acc = 0.0;
    for (const auto &t : r.terminals) acc += t.rate_cf;
    return acc / static_cast<double>(r.terminals.size());
}

inline double mean_rate_mc(const RateReport &r) {
    double acc = 0.0;
    for (const auto &t : r.terminals) acc += t.rate_mc;
    return acc / static_cast<double>(r.terminals.size());
}

} // namespace detail

/// Fig. 1 style sweep: ergodic secrecy rate over the BS antenna count for
/// every requested scheme, Monte Carlo next to the closed form.
inline std::string run_sweep_n(const ExperimentConfig &exp) {
    if (exp.n_values.empty()) throw config_error("config: sweep-n needs an N list");
    detail::require_singleton(exp.l_values.size(), "L");
    detail::require_singleton(exp.phi_values.size(), "phi");

    std::ostringstream csv;
    csv << "N,scheme,secrecy_cf,secrecy_mc,secrecy_mc_stderr,rate_cf,rate_mc,eve_bound,eve_mc\n";
    for (int n : exp.n_values) {
        for (Scheme s : exp.schemes) {
            EnsembleSpec spec;
            spec.cfg = exp.base;
            spec.cfg.num_antennas = n;
            spec.scheme = s;
            spec.n_trials = exp.n_trials;
            spec.master_seed = exp.master_seed;
            spec.num_threads = exp.num_threads;
            require_valid(spec.cfg, true);

            const EnsembleResult res = run_ensemble(spec);
            if (res.unreliable)
                throw std::runtime_error("sweep-n: unreliable ensemble (" +
                                         std::to_string(res.failures.size()) +
                                         " dropped trials) at N=" + std::to_string(n) +
                                         " scheme=" + to_string(s));
            const RateReport &r = res.rate_report;
            csv << n << ',' << to_string(s) << ',' << format_double(r.secrecy_cf) << ','
                << format_double(r.secrecy_mc) << ',' << format_double(res.secrecy_mc_se) << ','
                << format_double(detail::mean_rate_cf(r)) << ','
                << format_double(detail::mean_rate_mc(r)) << ',' << format_double(r.eve_bound)
                << ',' << format_double(r.eve_mc) << '\n';
        }
    }
    return csv.str();
}

/// Fig. 2 style sweep: closed-form secrecy bound over the phi grid for each
/// RF-chain count and scheme. Grid points where the Eve bound diverges
/// (phi = 1) keep their row with eve_bound = inf and zero secrecy.
inline std::string run_sweep_phi(const ExperimentConfig &exp) {
    if (exp.phi_values.empty()) throw config_error("config: sweep-phi needs a phi grid");
    if (exp.l_values.empty()) throw config_error("config: sweep-phi needs an L list");
    detail::require_singleton(exp.n_values.size(), "N");

    std::ostringstream csv;
    csv << "L,scheme,phi,secrecy_cf,eve_bound\n";
    for (int l : exp.l_values) {
        for (Scheme s : exp.schemes) {
            for (double phi : exp.phi_values) {
                SystemConfig cfg = exp.base;
                cfg.num_rf_chains = l;
                cfg.phi = phi;
                require_valid(cfg, true);

                double secrecy = 0.0, bound = INFINITY;
                if (phi < 1.0) {
                    bound = eve_capacity_bound(cfg);
                    secrecy = secrecy_rate_bound(s, cfg, 0);
                }
                csv << l << ',' << to_string(s) << ',' << format_double(phi) << ','
                    << format_double(secrecy) << ',' << format_double(bound) << '\n';
            }
        }
    }
    return csv.str();
}

struct OptimizeOutput {
    std::string curve_csv;
    std::string summary; // one "scheme,L,phi_star,secrecy_star" line per pair
};

/// Optimal power split per scheme and RF-chain count by one-dimensional
/// search on the closed-form secrecy bound.
inline OptimizeOutput run_optimize_phi(const ExperimentConfig &exp) {
    if (exp.l_values.empty()) throw config_error("config: optimize-phi needs an L list");
    detail::require_singleton(exp.n_values.size(), "N");

    OptimizeOutput out;
    std::ostringstream csv, summary;
    csv << "scheme,L,phi,secrecy_cf\n";
    summary << "scheme,L,phi_star,secrecy_star,zero_secrecy\n";
    for (int l : exp.l_values) {
        for (Scheme s : exp.schemes) {
            PhiSearchSpec spec;
            spec.cfg = exp.base;
            spec.cfg.num_rf_chains = l;
            spec.scheme = s;
            spec.grid_step = exp.grid_step;
            spec.refine = exp.refine;
            const PhiSearchResult res = optimize_phi(spec);
            for (const auto &[phi, sec] : res.curve)
                csv << to_string(s) << ',' << l << ',' << format_double(phi) << ','
                    << format_double(sec) << '\n';
            summary << to_string(s) << ',' << l << ',' << format_double(res.phi_star) << ','
                    << format_double(res.secrecy_star) << ',' << (res.zero_secrecy ? 1 : 0)
                    << '\n';
        }
    }
    out.curve_csv = csv.str();
    out.summary = summary.str();
    return out;
}

namespace detail {

struct CheckLog {
    std::ostream &os;
    bool all_pass = true;

    void check(const std::string &name, double measured, double tol, bool pass) {
        all_pass = all_pass && pass;
        os << (pass ? "PASS" : "FAIL") << "  " << name << ": measured=" << format_double(measured)
           << " tolerance=" << format_double(tol) << "\n";
    }
};

} // namespace detail

/// Runs the live invariant suite at the configured operating point and
/// reports one line per check. Returns true iff everything passed.
inline bool run_validate(const ExperimentConfig &exp, std::ostream &report) {
    detail::require_singleton(exp.n_values.size(), "N");
    detail::require_singleton(exp.l_values.size(), "L");
    detail::require_singleton(exp.phi_values.size(), "phi");

    detail::CheckLog log{report};
    const SystemConfig cfg = exp.base;

    // Config invariants first; a broken config fails fast by name.
    const auto violations = validate_config(cfg, true);
    for (const auto &v : violations) log.check("config invariant (" + v + ")", 0.0, 0.0, false);
    if (!violations.empty()) {
        report << "configuration invalid; remaining checks skipped\n";
        return false;
    }
    if (!(cfg.phi < 1.0)) {
        log.check("config invariant (phi < 1 for Eve metrics)", cfg.phi, 1.0, false);
        return false;
    }

    const double scale = exp.mc_tolerance_scale;
    const int probe_trials = std::min(exp.n_trials, 25);

    // Structural invariants on freshly built precoders.
    double worst_cm = 0.0, worst_dpow = 0.0, worst_anpow = 0.0, worst_null = 0.0,
           worst_zf = 0.0, worst_ins = 0.0;
    for (int t = 0; t < probe_trials; ++t) {
        RngStream rng(exp.master_seed, static_cast<std::uint64_t>(t));
        const ChannelRealization ch = generate_channels(cfg, rng);
        for (Scheme s : exp.schemes) {
            RngStream prng(exp.master_seed ^ 0x5ec0u, static_cast<std::uint64_t>(t));
            const BuildResult b = build_precoders(s, ch.H_hat, cfg, prng);
            const PrecoderSet &p = b.set;
            const double sqn = std::sqrt(static_cast<double>(cfg.num_antennas));
            if (!is_full_digital(s)) {
                worst_cm = std::max(worst_cm,
                                    (p.F.cwiseAbs() * sqn).array().abs().maxCoeff() - 1.0);
                worst_cm = std::max(worst_cm,
                                    1.0 - (p.F.cwiseAbs() * sqn).array().abs().minCoeff());
                worst_cm = std::max(worst_cm,
                                    (p.A.cwiseAbs() * sqn).array().abs().maxCoeff() - 1.0);
                worst_cm = std::max(worst_cm,
                                    1.0 - (p.A.cwiseAbs() * sqn).array().abs().minCoeff());
            }
            worst_dpow = std::max(worst_dpow,
                                  std::abs((p.F * p.W).squaredNorm() - cfg.num_terminals));
            worst_anpow = std::max(worst_anpow,
                                   std::abs((p.A * p.V).squaredNorm() - p.an_streams));
            if (s == Scheme::ANA) {
                for (double leak : b.ins->leakage) worst_ins = std::max(worst_ins, leak);
            } else {
                const double rel = (ch.H_hat.adjoint() * p.A * p.V).norm() /
                                   (ch.H_hat.norm() * p.A.norm());
                worst_null = std::max(worst_null, rel);
            }
            if (is_zero_forcing(s)) {
                const CMatrix G = ch.H_hat.adjoint() * p.F * p.W;
                const double diag = G.diagonal().cwiseAbs().minCoeff();
                for (int i = 0; i < G.rows(); ++i)
                    for (int j = 0; j < G.cols(); ++j)
                        if (i != j) worst_zf = std::max(worst_zf, std::abs(G(i, j)) / diag);
            }
        }
    }
    log.check("constant modulus |entry|*sqrt(N) on RF stages", worst_cm, 1e-15, worst_cm <= 1e-15);
    log.check("data power ||F W||^2 = K", worst_dpow, 1e-9, worst_dpow <= 1e-9);
    log.check("AN power ||A V||^2 = L-K", worst_anpow, 1e-9, worst_anpow <= 1e-9);
    log.check("AN null space ||H^H A V|| (relative)", worst_null, 1e-9, worst_null <= 1e-9);
    log.check("INS leakage per column", worst_ins, default_ins_tol, worst_ins <= default_ins_tol);
    log.check("ZF off-diagonal (relative)", worst_zf, 1e-9, worst_zf <= 1e-9);

    // Ordering relations between the closed forms.
    const OrderingReport ord = ordering_check(cfg);
    log.check("ordering FZF > HZF > ANA", ord.fzf_gt_hzf_gt_ana ? 1.0 : 0.0, 1.0,
              ord.fzf_gt_hzf_gt_ana);
    log.check("ordering FMF > ANA > HMF", ord.fmf_gt_ana_gt_hmf ? 1.0 : 0.0, 1.0,
              ord.fmf_gt_ana_gt_hmf);
    log.check("HZF/HMF threshold consistency", ord.threshold_consistent ? 1.0 : 0.0, 1.0,
              ord.threshold_consistent);

    // Monte Carlo vs closed form, and Eve's simulated capacity vs its bound.
    for (Scheme s : exp.schemes) {
        EnsembleSpec spec;
        spec.cfg = cfg;
        spec.scheme = s;
        spec.n_trials = exp.n_trials;
        spec.master_seed = exp.master_seed;
        spec.num_threads = exp.num_threads;
        const EnsembleResult res = run_ensemble(spec);
        const auto &pt = res.rate_report.terminals.front();
        const double rel = std::abs(pt.sinr_mc - pt.sinr_cf) / pt.sinr_cf;
        // The HMF row of the closed forms overstates the multiuser
        // interference suppression (its constant 2 drops the conjugate-phase
        // correlation; the simulated value sits near 1+lambda+pi*lambda/2),
        // so its regression band is wider than the other schemes'.
        const double tol = (s == Scheme::HMF ? 0.40 : 0.10) * scale;
        log.check("MC SINR vs closed form (" + to_string(s) + ")", rel, tol, rel <= tol);
        const double excess = res.eve_capacity_mc - res.rate_report.eve_bound;
        const double etol = 0.1 * scale;
        log.check("Eve MC capacity <= bound + tol (" + to_string(s) + ")", excess, etol,
                  excess <= etol);
        if (res.unreliable)
            log.check("dropped-trials gate (" + to_string(s) + ")",
                      static_cast<double>(res.failures.size()), 0.01 * exp.n_trials, false);
    }

    // Determinism: an ensemble rerun with a different worker count must agree
    // bit for bit.
    {
        EnsembleSpec spec;
        spec.cfg = cfg;
        spec.scheme = Scheme::HZF;
        spec.n_trials = std::min(exp.n_trials, 200);
        spec.master_seed = exp.master_seed;
        spec.num_threads = 1;
        const EnsembleResult a = run_ensemble(spec);
        spec.num_threads = 4;
        const EnsembleResult b = run_ensemble(spec);
        bool same = a.rate_report.secrecy_mc == b.rate_report.secrecy_mc &&
                    a.eve_capacity_mc == b.eve_capacity_mc && a.n_retained == b.n_retained;
        for (int k = 0; k < cfg.num_terminals && same; ++k)
            same = a.stats[static_cast<std::size_t>(k)].signal_amp ==
                   b.stats[static_cast<std::size_t>(k)].signal_amp;
        log.check("determinism across worker counts", same ? 0.0 : 1.0, 0.0, same);
    }

    report << (log.all_pass ? "validation passed\n" : "validation FAILED\n");
    return log.all_pass;
}

} // namespace secmimo

#endif // SECMIMO_EXPERIMENT_HPP
