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

#include <catch2/catch_amalgamated.hpp>

#include <secmimo/channel.hpp>

#include <algorithm>

using namespace secmimo;

TEST_CASE("MMSE estimation quality") {
    SECTION("0 dB pilots, tau = 3, beta = 1 give lambda = 3/4") {
        REQUIRE(derive_lambda(1.0, 3, 1.0) == Catch::Approx(0.75).epsilon(1e-15));
    }
    SECTION("no training energy gives lambda = 0") {
        REQUIRE(derive_lambda(0.0, 3, 1.0) == 0.0);
    }
    SECTION("asymptote of x/(1+x)") {
        REQUIRE(std::abs(derive_lambda(1e12, 1, 1.0) - 1.0) < 1e-9);
    }
    SECTION("nonpositive path loss rejected") {
        REQUIRE_THROWS_AS(derive_lambda(1.0, 3, 0.0), std::invalid_argument);
        REQUIRE_THROWS_AS(derive_lambda(1.0, 3, -2.0), std::invalid_argument);
    }
}

TEST_CASE("config validation") {
    SystemConfig cfg; // N=128, L=10, K=3, M=5 defaults

    SECTION("reference operating point is valid, including the Eve bound") {
        REQUIRE(validate_config(cfg, true).empty());
    }

    SECTION("L = K violates K < L") {
        cfg.num_rf_chains = cfg.num_terminals;
        const auto bad = validate_config(cfg, false);
        REQUIRE(std::find(bad.begin(), bad.end(), "K < L") != bad.end());
    }

    SECTION("L-K = M breaks the Eve bound requirement only when requested") {
        cfg.num_rf_chains = 8; // L-K = 5 = M
        REQUIRE(validate_config(cfg, false).empty());
        const auto bad = validate_config(cfg, true);
        REQUIRE(std::find(bad.begin(), bad.end(), "L-K > M") != bad.end());
    }

    SECTION("all violations are reported together") {
        cfg.num_rf_chains = 2; // K !< L and L-K <= M
        cfg.phi = 1.5;
        const auto bad = validate_config(cfg, true);
        REQUIRE(bad.size() >= 3);
    }
}

TEST_CASE("channel generation") {
    SystemConfig cfg;
    cfg.num_antennas = 64;

    SECTION("very strong pilots give near-perfect CSI") {
        cfg.pilot_power = 1e12;
        RngStream rng(3, 0);
        const ChannelRealization ch = generate_channels(cfg, rng);
        REQUIRE(ch.E.norm() / ch.H.norm() < 1e-3);
    }

    SECTION("H = H_hat + E exactly and lambda recorded") {
        RngStream rng(3, 1);
        const ChannelRealization ch = generate_channels(cfg, rng);
        REQUIRE(ch.H == CMatrix(ch.H_hat + ch.E));
        REQUIRE(ch.lambda(0) == Catch::Approx(0.75));
    }

    SECTION("estimate power concentrates at lambda") {
        double acc = 0.0;
        const int trials = 5000;
        for (int t = 0; t < trials; ++t) {
            RngStream rng(99, static_cast<std::uint64_t>(t));
            acc += generate_channels(cfg, rng).H_hat.squaredNorm();
        }
        const double mean = acc / (trials * 64.0 * 3.0);
        REQUIRE(std::abs(mean - 0.75) < 0.05 * 0.75);
    }

    SECTION("same seed reproduces the identical realization") {
        RngStream a(17, 4), b(17, 4);
        const ChannelRealization x = generate_channels(cfg, a);
        const ChannelRealization y = generate_channels(cfg, b);
        REQUIRE(x.H == y.H);
        REQUIRE(x.G_E == y.G_E);
    }

    SECTION("estimate and error are empirically uncorrelated") {
        Complex acc(0, 0);
        int count = 0;
        for (int t = 0; t < 60; ++t) {
            RngStream rng(5, static_cast<std::uint64_t>(t));
            const ChannelRealization ch = generate_channels(cfg, rng);
            for (int k = 0; k < 3; ++k) {
                acc += ch.H_hat.col(k).dot(ch.E.col(k));
                count += 64;
            }
        }
        // E[conj(hhat) e] = 0; each product has variance lambda(1-lambda).
        const double se = std::sqrt(0.75 * 0.25 / count);
        REQUIRE(std::abs(acc / static_cast<double>(count)) < 3.0 * se);
    }

    SECTION("true channel has unit per-entry variance") {
        double acc = 0.0;
        const int trials = 2000;
        for (int t = 0; t < trials; ++t) {
            RngStream rng(31, static_cast<std::uint64_t>(t));
            acc += generate_channels(cfg, rng).H.squaredNorm();
        }
        const double mean = acc / (trials * 64.0 * 3.0);
        REQUIRE(std::abs(mean - 1.0) < 0.05);
    }

    SECTION("explicit CSI override reaches lambda = 1 exactly") {
        cfg.csi_quality = {1.0, 1.0, 1.0};
        RngStream rng(8, 0);
        const ChannelRealization ch = generate_channels(cfg, rng);
        REQUIRE(ch.E.norm() == 0.0);
        REQUIRE(ch.H == ch.H_hat);
    }

    SECTION("invalid config propagates") {
        cfg.num_rf_chains = 2;
        RngStream rng(1, 0);
        REQUIRE_THROWS_AS(generate_channels(cfg, rng), std::invalid_argument);
    }
}
