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

#ifndef SECMIMO_NUMKERNEL_HPP
#define SECMIMO_NUMKERNEL_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace secmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Thrown when a matrix expected to have full row rank does not.
class rank_deficiency_error : public std::runtime_error {
  public:
    rank_deficiency_error(const std::string &msg, int detected_rank)
        : std::runtime_error(msg), detected_rank_(detected_rank) {}
    int detected_rank() const { return detected_rank_; }

  private:
    int detected_rank_;
};

/// Thrown when a linear system is numerically singular.
class singular_matrix_error : public std::runtime_error {
  public:
    singular_matrix_error(const std::string &msg, double condition_estimate)
        : std::runtime_error(msg), condition_(condition_estimate) {}
    double condition_estimate() const { return condition_; }

  private:
    double condition_;
};

// Default relative cutoff for rank decisions; comfortably above double
// precision noise for problem sizes N <= 1024.
inline constexpr double default_null_space_tol = 1e-10;

/// Seeded random stream. Identical (master_seed, stream_id) pairs reproduce
/// the identical sample sequence across runs and thread counts; Monte Carlo
/// trial t uses stream_id = t so results do not depend on execution order.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : master_seed_(master_seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(stream_id & 0xffffffffu),
                          static_cast<std::uint32_t>(stream_id >> 32),
                          0x9e3779b9u};
        engine_.seed(seq);
    }

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Standard normal draw.
    double normal() { return normal_(engine_); }

    /// Uniform draw on [0, 1).
    double uniform() { return uniform_(engine_); }

    /// Uniform phase on [0, 2*pi).
    double phase() { return 2.0 * M_PI * uniform(); }

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries
/// CN(0, variance); real and imaginary parts each carry variance/2.
inline CMatrix sample_complex_gaussian(int rows, int cols, double variance, RngStream &rng) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("sample_complex_gaussian: shape must be at least 1x1");
    if (variance < 0.0 || !std::isfinite(variance))
        throw std::invalid_argument("sample_complex_gaussian: variance must be finite and >= 0");

    const double scale = std::sqrt(variance / 2.0);
    CMatrix out(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            out(i, j) = Complex(scale * re, scale * im);
        }
    return out;
}

/// Orthonormal basis Q of the null space of a k x n matrix with k < n and
/// full row rank: M*Q ~ 0 and Q^H*Q = I. Rank is decided by SVD; singular
/// values below tol * sigma_max count as zero.
inline CMatrix null_space_basis(const CMatrix &M, double tol = default_null_space_tol) {
    const int k = static_cast<int>(M.rows());
    const int n = static_cast<int>(M.cols());
    if (k < 1 || n < 1)
        throw std::invalid_argument("null_space_basis: empty matrix");
    if (k >= n)
        throw std::invalid_argument("null_space_basis: need strictly fewer rows than columns");
    if (!(tol > 0.0))
        throw std::invalid_argument("null_space_basis: tol must be positive");

    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    const double cutoff = tol * sv(0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;

    if (rank < k)
        throw rank_deficiency_error("null_space_basis: matrix is rank deficient (rank " +
                                        std::to_string(rank) + " < " + std::to_string(k) + ")",
                                    rank);
    return svd.matrixV().rightCols(n - k);
}

/// Entrywise constant-modulus projection: every entry maps to
/// (1/sqrt(n_antennas)) * exp(j*arg(entry)); zero entries take phase 0.
inline CMatrix phase_only_project(const CMatrix &M, int n_antennas) {
    if (n_antennas < 1)
        throw std::invalid_argument("phase_only_project: antenna count must be >= 1");
    const double mod = 1.0 / std::sqrt(static_cast<double>(n_antennas));
    return M.unaryExpr([mod](const Complex &z) {
        const double a = std::abs(z);
        return a == 0.0 ? Complex(mod, 0.0) : Complex(mod * z.real() / a, mod * z.imag() / a);
    });
}

} // namespace secmimo

#endif // SECMIMO_NUMKERNEL_HPP
