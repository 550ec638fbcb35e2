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
//
// Batch front-end. Subcommands:
//   sweep-n       secrecy rate over the BS antenna count (MC + closed form)
//   sweep-phi     closed-form secrecy bound over the power-split grid
//   optimize-phi  one-dimensional search for the optimal power split
//   validate      live invariant suite at the configured operating point
//
// Exit codes: 0 success, 2 config error, 3 validation failure,
// 4 runtime numerical failure.

#include <CLI11.hpp>

#include <secmimo/experiment.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
};

void add_common(CLI::App *cmd, CommonArgs &args, bool out_required) {
    cmd->add_option("--config", args.config_path, "key=value experiment config file")
        ->required();
    auto *out = cmd->add_option("--out", args.out_path, "output file path");
    if (out_required) out->required();
    cmd->add_option("--seed", args.seed, "override the master seed");
    cmd->add_option("--trials", args.trials, "override the Monte Carlo trial count");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

secmimo::ExperimentConfig load(const CommonArgs &args) {
    auto cfg = secmimo::parse_config_file(args.config_path);
    if (args.seed) cfg.master_seed = *args.seed;
    if (args.trials) {
        if (*args.trials < 1) throw secmimo::config_error("--trials must be >= 1");
        cfg.n_trials = *args.trials;
    }
    if (args.threads) cfg.num_threads = *args.threads;
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"secure massive MIMO downlink simulator"};
    app.require_subcommand(1);

    CommonArgs sweep_n_args, sweep_phi_args, optimize_args, validate_args;
    auto *sweep_n = app.add_subcommand("sweep-n", "secrecy rate vs antenna count");
    add_common(sweep_n, sweep_n_args, true);
    auto *sweep_phi = app.add_subcommand("sweep-phi", "closed-form secrecy vs power split");
    add_common(sweep_phi, sweep_phi_args, true);
    auto *optimize = app.add_subcommand("optimize-phi", "optimal power split search");
    add_common(optimize, optimize_args, true);
    auto *validate = app.add_subcommand("validate", "run the invariant suite");
    add_common(validate, validate_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (sweep_n->parsed()) {
            const auto cfg = load(sweep_n_args);
            secmimo::write_file_atomic(sweep_n_args.out_path, secmimo::run_sweep_n(cfg));
            std::cout << "wrote " << sweep_n_args.out_path << "\n";
        } else if (sweep_phi->parsed()) {
            const auto cfg = load(sweep_phi_args);
            secmimo::write_file_atomic(sweep_phi_args.out_path, secmimo::run_sweep_phi(cfg));
            std::cout << "wrote " << sweep_phi_args.out_path << "\n";
        } else if (optimize->parsed()) {
            const auto cfg = load(optimize_args);
            const auto out = secmimo::run_optimize_phi(cfg);
            secmimo::write_file_atomic(optimize_args.out_path, out.curve_csv);
            std::cout << out.summary;
            std::cout << "wrote " << optimize_args.out_path << "\n";
        } else if (validate->parsed()) {
            const auto cfg = load(validate_args);
            std::ostringstream report;
            const bool ok = secmimo::run_validate(cfg, report);
            std::cout << report.str();
            if (!validate_args.out_path.empty())
                secmimo::write_file_atomic(validate_args.out_path, report.str());
            return ok ? 0 : 3;
        }
    } catch (const secmimo::config_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
