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

#ifndef SECMIMO_PRECODER_HPP
#define SECMIMO_PRECODER_HPP

#include "channel.hpp"
#include "numkernel.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace secmimo {

/// The five data/AN precoder pairs under comparison: pure analog (ANA),
/// hybrid with baseband MF or ZF (HMF, HZF), and the full-digital
/// references (FMF, FZF).
enum class Scheme { ANA, HMF, HZF, FMF, FZF };

inline constexpr std::array<Scheme, 5> all_schemes{Scheme::ANA, Scheme::HMF, Scheme::HZF,
                                                   Scheme::FMF, Scheme::FZF};

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::ANA: return "ANA";
        case Scheme::HMF: return "HMF";
        case Scheme::HZF: return "HZF";
        case Scheme::FMF: return "FMF";
        case Scheme::FZF: return "FZF";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(const std::string &name) {
    for (Scheme s : all_schemes)
        if (to_string(s) == name) return s;
    return std::nullopt;
}

inline bool is_full_digital(Scheme s) { return s == Scheme::FMF || s == Scheme::FZF; }
inline bool is_zero_forcing(Scheme s) { return s == Scheme::HZF || s == Scheme::FZF; }

/// One scheme's four precoding stages. The transmitted signal is
/// F*W*s + A*V*z with ||F*W||_F^2 = K and ||A*V||_F^2 = an_streams.
/// For ANA, W and V are identities; for FMF/FZF, F and A are N x N
/// identity pass-throughs.
struct PrecoderSet {
    Scheme scheme;
    CMatrix F; // RF data stage, N x L1
    CMatrix W; // baseband data, L1 x K
    CMatrix A; // RF AN stage, N x L2
    CMatrix V; // baseband AN, L2 x an_streams
    int an_streams = 0; // L3 = L - K
};

/// Per-column convergence record of the iterative null-space AN search.
struct InsReport {
    std::vector<int> iterations;
    std::vector<double> leakage; // ||H_hat^H a||^2 per column
    int num_converged = 0;
    bool all_converged = true;
};

namespace detail {

// Applies v - H_hat (H_hat^H H_hat)^-1 H_hat^H v, the orthogonal projector
// onto the null space of H_hat^H.
class NullSpaceProjector {
  public:
    explicit NullSpaceProjector(const CMatrix &H_hat) : H_(H_hat) {
        if (H_.cols() > 0) llt_.compute(H_.adjoint() * H_);
    }
    CVector apply(const CVector &v) const {
        if (H_.cols() == 0) return v;
        return v - H_ * llt_.solve(H_.adjoint() * v);
    }

  private:
    const CMatrix &H_;
    Eigen::LLT<CMatrix> llt_;
};

inline CVector random_phase_vector(int n, double mod, RngStream &rng) {
    CVector v(n);
    for (int i = 0; i < n; ++i) {
        const double p = rng.phase();
        v(i) = Complex(mod * std::cos(p), mod * std::sin(p));
    }
    return v;
}

} // namespace detail

/// Phase-only conjugate data precoder: column k carries the entry phases of
/// the estimated channel of MT k, so g_k^H f_k combines coherently. With
/// W = I the power constraint ||F||_F^2 = K holds by construction.
inline CMatrix build_analog_data(const CMatrix &H_hat) {
    return phase_only_project(H_hat, static_cast<int>(H_hat.rows()));
}

struct InsResult {
    CMatrix A;
    InsReport report;
};

/// Iterative null-space AN precoder: each column is constant-modulus 1/sqrt(N)
/// and is driven into the null space of H_hat^H by alternating projection
/// (null-space projection, then entrywise phase projection). A column counts
/// as converged once its leakage ||H_hat^H a||^2 drops to tol. Non-converged
/// columns are returned best-effort and flagged in the report.
inline InsResult build_analog_an_ins(const CMatrix &H_hat, int num_columns, double tol,
                                     int max_iter, RngStream &rng) {
    const int n = static_cast<int>(H_hat.rows());
    if (num_columns < 1) throw std::invalid_argument("build_analog_an_ins: need >= 1 column");
    if (max_iter < 1) throw std::invalid_argument("build_analog_an_ins: max_iter must be >= 1");

    const double mod = 1.0 / std::sqrt(static_cast<double>(n));
    detail::NullSpaceProjector project(H_hat);

    InsResult res;
    res.A.resize(n, num_columns);
    res.report.iterations.resize(num_columns, 0);
    res.report.leakage.resize(num_columns, 0.0);

    for (int c = 0; c < num_columns; ++c) {
        CVector v = detail::random_phase_vector(n, mod, rng);
        double leak = H_hat.cols() > 0 ? (H_hat.adjoint() * v).squaredNorm() : 0.0;
        int used = 0;
        bool ok = leak <= tol;
        while (!ok && used < max_iter) {
            ++used;
            CVector u = project.apply(v);
            if (u.norm() < 1e-12) {
                // Start landed (numerically) inside the channel subspace.
                u = detail::random_phase_vector(n, mod, rng);
            }
            v = phase_only_project(u, n);
            leak = (H_hat.adjoint() * v).squaredNorm();
            ok = leak <= tol;
        }
        res.A.col(c) = v;
        res.report.iterations[c] = used;
        res.report.leakage[c] = leak;
        if (ok)
            ++res.report.num_converged;
        else
            res.report.all_converged = false;
    }
    return res;
}

/// Hybrid RF stage: the first K columns harvest the array gain as in the
/// analog data precoder, the remaining L-K columns carry i.i.d. uniform
/// phases per entry to open the extra spatial dimensions to the baseband.
inline CMatrix build_hybrid_rf(const CMatrix &H_hat, int num_chains, RngStream &rng) {
    const int n = static_cast<int>(H_hat.rows());
    const int k = static_cast<int>(H_hat.cols());
    if (num_chains < k)
        throw std::invalid_argument("build_hybrid_rf: need at least K RF chains");

    CMatrix F(n, num_chains);
    F.leftCols(k) = build_analog_data(H_hat);
    const double mod = 1.0 / std::sqrt(static_cast<double>(n));
    for (int j = k; j < num_chains; ++j) F.col(j) = detail::random_phase_vector(n, mod, rng);
    return F;
}

namespace detail {

// Rescales W so that ||F*W||_F^2 = K exactly for the realized matrices.
inline CMatrix normalize_data_power(const CMatrix &F, CMatrix W) {
    const double p = (F * W).squaredNorm();
    const int k = static_cast<int>(W.cols());
    if (!(p > 0.0) || !std::isfinite(p))
        throw std::invalid_argument("data precoder normalization: degenerate input");
    W *= std::sqrt(static_cast<double>(k) / p);
    return W;
}

} // namespace detail

/// Baseband matched filter W = gamma_MF F^H H_hat, scaled to the exact
/// per-trial power constraint ||F*W||_F^2 = K.
inline CMatrix build_baseband_mf(const CMatrix &F, const CMatrix &H_hat) {
    return detail::normalize_data_power(F, F.adjoint() * H_hat);
}

/// Baseband zero forcing W = gamma_ZF F^H H_hat (H_hat^H F F^H H_hat)^-1,
/// scaled like the MF precoder. Throws singular_matrix_error when the K x K
/// Gram matrix is not safely invertible.
inline CMatrix build_baseband_zf(const CMatrix &F, const CMatrix &H_hat) {
    const CMatrix B = F.adjoint() * H_hat; // L x K
    const CMatrix G = B.adjoint() * B;     // K x K, Hermitian PSD

    Eigen::SelfAdjointEigenSolver<CMatrix> es(G);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(emin > emax * 1e-12) || !(emax > 0.0))
        throw singular_matrix_error("build_baseband_zf: H_hat^H F F^H H_hat is singular",
                                    emin > 0.0 ? emax / emin : INFINITY);

    const CMatrix W0 = G.llt().solve(B.adjoint()).adjoint(); // B * G^-1
    return detail::normalize_data_power(F, W0);
}

/// Shared baseband AN precoder V = null(H_hat^H A), scaled so that
/// ||A*V||_F^2 equals the number of AN streams.
inline CMatrix build_baseband_an(const CMatrix &A, const CMatrix &H_hat,
                                 double tol = default_null_space_tol) {
    const CMatrix B = H_hat.adjoint() * A; // K x L2
    CMatrix V = null_space_basis(B, tol);
    const double p = (A * V).squaredNorm();
    if (!(p > 0.0)) throw std::invalid_argument("build_baseband_an: degenerate AN subspace");
    V *= std::sqrt(static_cast<double>(V.cols()) / p);
    return V;
}

/// Full-digital reference schemes: F = A = I_N, MF/ZF data precoding on
/// H_hat directly, AN on the null space of H_hat^H truncated to an_streams
/// columns so the per-stream AN power matches the hybrid schemes.
inline PrecoderSet build_full_digital(Scheme scheme, const CMatrix &H_hat, int an_streams,
                                      double tol = default_null_space_tol) {
    if (!is_full_digital(scheme))
        throw std::invalid_argument("build_full_digital: scheme must be FMF or FZF");
    const int n = static_cast<int>(H_hat.rows());
    const int k = static_cast<int>(H_hat.cols());
    if (n - k < an_streams)
        throw std::invalid_argument("build_full_digital: need N - K >= L - K null directions");

    PrecoderSet set;
    set.scheme = scheme;
    set.an_streams = an_streams;
    set.F = CMatrix::Identity(n, n);
    set.A = set.F;
    set.W = scheme == Scheme::FMF ? build_baseband_mf(set.F, H_hat)
                                  : build_baseband_zf(set.F, H_hat);

    CMatrix V = null_space_basis(H_hat.adjoint(), tol).leftCols(an_streams);
    V *= std::sqrt(static_cast<double>(an_streams) / V.squaredNorm());
    set.V = std::move(V);
    return set;
}

inline constexpr double default_ins_tol = 1e-6;
inline constexpr int default_ins_max_iter = 500;

struct BuildResult {
    PrecoderSet set;
    std::optional<InsReport> ins; // only for ANA
};

/// Builds the complete precoder set for one scheme and one channel estimate.
inline BuildResult build_precoders(Scheme scheme, const CMatrix &H_hat, const SystemConfig &cfg,
                                   RngStream &rng, double ins_tol = default_ins_tol,
                                   int ins_max_iter = default_ins_max_iter) {
    const int k = cfg.num_terminals;
    const int l = cfg.num_rf_chains;
    const int l3 = cfg.an_streams();

    BuildResult out;
    switch (scheme) {
        case Scheme::ANA: {
            out.set.scheme = scheme;
            out.set.an_streams = l3;
            out.set.F = build_analog_data(H_hat);
            out.set.W = CMatrix::Identity(k, k);
            auto ins = build_analog_an_ins(H_hat, l3, ins_tol, ins_max_iter, rng);
            out.set.A = std::move(ins.A);
            out.set.V = CMatrix::Identity(l3, l3);
            out.ins = std::move(ins.report);
            break;
        }
        case Scheme::HMF:
        case Scheme::HZF: {
            out.set.scheme = scheme;
            out.set.an_streams = l3;
            out.set.F = build_hybrid_rf(H_hat, l, rng);
            out.set.A = out.set.F; // Proposition-2 structure: F = A, L1 = L2 = L
            out.set.W = scheme == Scheme::HMF ? build_baseband_mf(out.set.F, H_hat)
                                              : build_baseband_zf(out.set.F, H_hat);
            out.set.V = build_baseband_an(out.set.A, H_hat);
            break;
        }
        case Scheme::FMF:
        case Scheme::FZF:
            out.set = build_full_digital(scheme, H_hat, l3);
            break;
    }
    return out;
}

} // namespace secmimo

#endif // SECMIMO_PRECODER_HPP
