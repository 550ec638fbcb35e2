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

#include <secmimo/metrics.hpp>

using namespace secmimo;

namespace {

SystemConfig fig_config(int n = 128) {
    SystemConfig cfg;
    cfg.num_antennas = n; // L=10, K=3, M=5, P=10, phi=0.5, lambda=0.75 defaults
    return cfg;
}

} // namespace

TEST_CASE("MT SINR assembly from term statistics") {
    SystemConfig cfg = fig_config();

    SECTION("no interference and full data power reduce to P signal^2 / (sigma^2/beta)") {
        SystemConfig one = cfg;
        one.num_terminals = 1;
        one.num_rf_chains = 4;
        one.phi = 1.0;
        one.path_loss = {2.0};
        one.csi_quality = {0.75};
        TermStats st;
        st.signal_amp = 3.0;
        st.an_leakage = 123.0; // weighted by (1-phi) = 0
        const double got = mt_sinr_from_stats(st, one, 0);
        REQUIRE(got == Catch::Approx(10.0 * 9.0 / (1.0 / 2.0)).epsilon(1e-12));
    }

    SECTION("closed-form ANA statistics reproduce the ANA row") {
        TermStats st;
        st.signal_amp = std::sqrt(M_PI * 128.0 * 0.75) / 2.0;
        st.interference = RVector::Constant(2, 1.0);
        st.an_leakage = 7.0 * 0.25; // (L-K)(1-lambda)
        const double got = mt_sinr_from_stats(st, cfg, 0);
        REQUIRE(got == Catch::Approx(closed_form_sinr(Scheme::ANA, cfg, 0)).epsilon(1e-12));
    }

    SECTION("zero signal gives zero SINR") {
        TermStats st;
        st.signal_amp = 0.0;
        st.interference = RVector::Constant(2, 1.0);
        REQUIRE(mt_sinr_from_stats(st, cfg, 0) == 0.0);
    }

    SECTION("zero denominator is rejected") {
        SystemConfig bad = cfg;
        bad.phi = 1.0;
        bad.noise_power = 0.0; // bypasses validation on purpose
        TermStats st;
        st.signal_amp = 1.0;
        st.interference = RVector::Zero(2);
        REQUIRE_THROWS_AS(mt_sinr_from_stats(st, bad, 0), std::invalid_argument);
    }
}

TEST_CASE("Eve SINR") {
    SystemConfig cfg = fig_config(64);

    // A deterministic small precoder set for hand computation.
    auto make_set = [](int n, int l3) {
        PrecoderSet p;
        p.scheme = Scheme::FZF;
        p.an_streams = l3;
        p.F = CMatrix::Identity(n, n);
        p.A = p.F;
        RngStream rng(900, 0);
        p.W = sample_complex_gaussian(n, 3, 1.0, rng);
        p.V = sample_complex_gaussian(n, l3, 1.0, rng);
        return p;
    };

    SECTION("single Eve antenna reduces to a scalar ratio") {
        const auto p = make_set(16, 7);
        SystemConfig one = cfg;
        one.num_antennas = 16;
        one.num_eve_antennas = 1;
        RngStream rng(901, 0);
        const CMatrix g = sample_complex_gaussian(16, 1, 1.0, rng);
        const double got = eve_sinr(p, g, one, 0);
        const double num = std::norm((g.col(0).adjoint() * p.F * p.W.col(0))(0));
        const double den = (g.col(0).adjoint() * p.A * p.V).squaredNorm();
        const double want = (7.0 * 0.5 / (3.0 * 0.5)) * num / den;
        REQUIRE(got == Catch::Approx(want).epsilon(1e-12));
    }

    SECTION("invariant to positive rescaling of Eve's channel") {
        const auto p = make_set(32, 7);
        SystemConfig e = cfg;
        e.num_antennas = 32;
        RngStream rng(902, 0);
        const CMatrix g = sample_complex_gaussian(32, 5, 1.0, rng);
        const double a = eve_sinr(p, g, e, 1);
        const double b = eve_sinr(p, CMatrix(3.7 * g), e, 1);
        REQUIRE(std::abs(a - b) < 1e-10 * a);
    }

    SECTION("fewer AN streams than Eve antennas is singular") {
        const auto p = make_set(32, 3);
        RngStream rng(903, 0);
        const CMatrix g = sample_complex_gaussian(32, 5, 1.0, rng);
        REQUIRE_THROWS_AS(eve_sinr(p, g, cfg, 0), singular_matrix_error);
    }

    SECTION("undefined at phi = 1") {
        const auto p = make_set(32, 7);
        SystemConfig e = cfg;
        e.phi = 1.0;
        RngStream rng(904, 0);
        const CMatrix g = sample_complex_gaussian(32, 5, 1.0, rng);
        REQUIRE_THROWS_AS(eve_sinr(p, g, e, 0), std::domain_error);
    }
}

TEST_CASE("closed-form SINR rows") {
    SECTION("ANA row at the reference point") {
        const SystemConfig cfg = fig_config();
        // Direct evaluation: (phiP/K)(pi/4 lam N) over
        // (phiP/K)(K-1) + (1-phi)P(1-lam) + sigma2/beta.
        const double dp = 0.5 * 10.0 / 3.0;
        const double want = dp * (M_PI / 4.0 * 0.75 * 128.0) / (dp * 2.0 + 5.0 * 0.25 + 1.0);
        const double got = closed_form_sinr(Scheme::ANA, cfg, 0);
        REQUIRE(got == Catch::Approx(want).epsilon(1e-14));
        REQUIRE(got == Catch::Approx(22.507).margin(2e-3));
    }

    SECTION("perfect CSI makes ZF noise-limited") {
        SystemConfig cfg = fig_config();
        cfg.csi_quality = {1.0, 1.0, 1.0};
        const double dp = 0.5 * 10.0 / 3.0;
        const double got = closed_form_sinr(Scheme::HZF, cfg, 0);
        REQUIRE(got == Catch::Approx(dp * (M_PI / 4.0 * 127.0) / 1.0).epsilon(1e-14));
    }

    SECTION("FZF/HZF ratio identity") {
        const SystemConfig cfg = fig_config(256);
        const double ratio = closed_form_sinr(Scheme::FZF, cfg, 0) /
                             closed_form_sinr(Scheme::HZF, cfg, 0);
        REQUIRE(ratio == Catch::Approx(4.0 * (256.0 - 3.0) / (M_PI * 255.0)).epsilon(1e-12));
    }

    SECTION("per-MT path loss enters through sigma^2/beta") {
        SystemConfig cfg = fig_config();
        cfg.path_loss = {1.0, 0.5, 0.25};
        cfg.csi_quality = {0.75, 0.75, 0.75};
        REQUIRE(closed_form_sinr(Scheme::ANA, cfg, 0) > closed_form_sinr(Scheme::ANA, cfg, 1));
        REQUIRE(closed_form_sinr(Scheme::ANA, cfg, 1) > closed_form_sinr(Scheme::ANA, cfg, 2));
    }
}

TEST_CASE("Eve capacity bound") {
    SystemConfig cfg = fig_config();

    SECTION("reference point evaluates to log2(1 + 35/6)") {
        const double want = std::log2(1.0 + 0.5 * 5.0 / (3.0 * 0.5 * (1.0 - 5.0 / 7.0)));
        REQUIRE(eve_capacity_bound(cfg) == Catch::Approx(want).epsilon(1e-14));
        REQUIRE(eve_capacity_bound(cfg) == Catch::Approx(2.7726).margin(1e-4));
    }

    SECTION("no eavesdropper antennas means no bound penalty") {
        cfg.num_eve_antennas = 0;
        REQUIRE(eve_capacity_bound(cfg) == 0.0);
    }

    SECTION("vanishing data power sends the bound to zero") {
        cfg.phi = 1e-12;
        REQUIRE(eve_capacity_bound(cfg) < 1e-10);
    }

    SECTION("domain errors") {
        SystemConfig a = cfg;
        a.num_rf_chains = 8; // L-K = M
        REQUIRE_THROWS_AS(eve_capacity_bound(a), std::domain_error);
        SystemConfig b = cfg;
        b.phi = 1.0;
        REQUIRE_THROWS_AS(eve_capacity_bound(b), std::domain_error);
    }

    SECTION("monotone in phi, M and 1/L") {
        double prev = 0.0;
        for (double phi : {0.2, 0.4, 0.6, 0.8}) {
            SystemConfig c = cfg;
            c.phi = phi;
            const double v = eve_capacity_bound(c);
            REQUIRE(v > prev);
            prev = v;
        }
        prev = 0.0;
        for (int m : {1, 2, 3, 4, 5, 6}) {
            SystemConfig c = cfg;
            c.num_eve_antennas = m;
            const double v = eve_capacity_bound(c);
            REQUIRE(v > prev);
            prev = v;
        }
        prev = INFINITY;
        for (int l : {9, 10, 12, 16, 24}) {
            SystemConfig c = cfg;
            c.num_rf_chains = l;
            const double v = eve_capacity_bound(c);
            REQUIRE(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("secrecy rate bound") {
    const SystemConfig cfg = fig_config();

    SECTION("composition at the reference point") {
        const double rate = std::log2(1.0 + closed_form_sinr(Scheme::ANA, cfg, 0));
        const double want = rate - eve_capacity_bound(cfg);
        REQUIRE(secrecy_rate_bound(Scheme::ANA, cfg, 0) == Catch::Approx(want).epsilon(1e-14));
        REQUIRE(secrecy_rate_bound(Scheme::ANA, cfg, 0) == Catch::Approx(1.7824).margin(1e-3));
    }

    SECTION("clamped at zero when the bound dominates") {
        SystemConfig weak = cfg;
        weak.power = 1e-6;
        REQUIRE(secrecy_rate_bound(Scheme::HMF, weak, 0) == 0.0);
    }

    SECTION("no eavesdropper reduces secrecy to the rate") {
        SystemConfig m0 = cfg;
        m0.num_eve_antennas = 0;
        REQUIRE(secrecy_rate_bound(Scheme::HZF, m0, 0) ==
                Catch::Approx(std::log2(1.0 + closed_form_sinr(Scheme::HZF, m0, 0))));
    }

    SECTION("always nonnegative on a parameter grid") {
        for (double p : {0.01, 1.0, 100.0})
            for (double phi : {0.05, 0.5, 0.95})
                for (Scheme s : all_schemes) {
                    SystemConfig c = cfg;
                    c.power = p;
                    c.phi = phi;
                    REQUIRE(secrecy_rate_bound(s, c, 0) >= 0.0);
                }
    }
}

TEST_CASE("ordering report") {
    SECTION("large-N orderings hold in the asymptotic regime") {
        const auto r = ordering_check(fig_config(512));
        REQUIRE(r.fzf_gt_hzf_gt_ana);
        REQUIRE(r.fmf_gt_ana_gt_hmf);
        REQUIRE(r.hzf_gt_hmf);
    }

    SECTION("threshold equivalence is exact given the closed forms") {
        for (int n : {16, 32, 64, 128, 512})
            for (double p : {0.1, 1.0, 10.0, 1000.0}) {
                SystemConfig c = fig_config(n);
                c.power = p;
                REQUIRE(ordering_check(c).threshold_consistent);
            }
    }

    SECTION("perfect-CSI reduction zeroes the imperfection terms") {
        SystemConfig c = fig_config();
        c.csi_quality = {1.0, 1.0, 1.0};
        const double dp = 0.5 * 10.0 / 3.0;
        REQUIRE(closed_form_sinr(Scheme::FZF, c, 0) ==
                Catch::Approx(dp * (256.0 - 3.0) * 0.0 + dp * 1.0 * (128.0 - 3.0) / 1.0));
    }
}
