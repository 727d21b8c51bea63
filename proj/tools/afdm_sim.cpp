// SPDX-License-Identifier: Apache-2.0
//
// afdm-sbl: joint phase-noise and off-grid channel estimation for AFDM links
// Copyright (C) 2026 The afdm-sbl authors
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

// afdm_sim - command-line front end to the Monte Carlo harness.
//
//   afdm_sim run (--config <ini> | --preset <name>) --out <csv> [--workers n]
//                [--seed u64] [--trials n] [--diagnostics <jsonl>]
//                [--trajectory <csv>] [--timing]
//   afdm_sim validate --config <ini>
//   afdm_sim presets list
//   afdm_sim presets show <name>

#include "afdm/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"AFDM link-level simulation with joint phase-noise and off-grid channel estimation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string out_path;
    std::string diagnostics_path;
    std::string trajectory_path;
    int workers = 1;
    std::uint64_t seed = 0;
    int trials = 0;
    bool timing = false;

    auto *run = app.add_subcommand("run", "Run an SNR sweep and write per-trial metrics as CSV");
    auto *cfg_opt = run->add_option("--config", config_path, "Configuration file (INI)")->check(CLI::ExistingFile);
    auto *preset_opt = run->add_option("--preset", preset, "Built-in preset name");
    cfg_opt->excludes(preset_opt);
    run->add_option("--out", out_path, "Output CSV path")->required();
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    auto *seed_opt = run->add_option("--seed", seed, "Override the sweep seed");
    auto *trials_opt = run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
    run->add_option("--diagnostics", diagnostics_path, "Write per-run diagnostics as JSON lines");
    run->add_option("--trajectory", trajectory_path, "Write trial-0 phase trajectories as CSV");
    run->add_flag("--timing", timing, "Record estimator runtime in runtime_ms");

    auto *validate = app.add_subcommand("validate", "Parse and validate a configuration file");
    validate->add_option("--config", config_path, "Configuration file (INI)")->required()->check(CLI::ExistingFile);

    auto *presets = app.add_subcommand("presets", "List or print built-in presets");
    presets->require_subcommand(1);
    presets->add_subcommand("list", "List preset names");
    std::string show_name;
    auto *show = presets->add_subcommand("show", "Print a preset as configuration text");
    show->add_option("name", show_name, "Preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            if (config_path.empty() && preset.empty())
                throw afdm::ConfigError("run: one of --config or --preset is required");
            afdm::ExperimentConfig cfg =
                config_path.empty() ? afdm::parse_config(afdm::preset_text(preset)) : afdm::load_config(config_path);
            if (*seed_opt)
                cfg.seed = seed;
            if (*trials_opt)
                cfg.trials = trials;
            if (timing)
                cfg.record_runtime = true;

            afdm::SweepOptions opts;
            opts.workers = workers;
            if (!diagnostics_path.empty())
                opts.diagnostics = diagnostics_path;
            if (!trajectory_path.empty())
                opts.trajectory = trajectory_path;
            afdm::run_sweep(cfg, out_path, opts);
        }
        else if (*validate)
        {
            const afdm::ExperimentConfig cfg = afdm::load_config(config_path);
            std::cout << afdm::format_config(cfg);
        }
        else if (*presets)
        {
            if (*show)
                std::cout << afdm::preset_text(show_name);
            else
                for (const std::string &name : afdm::preset_names())
                    std::cout << name << '\n';
        }
    }
    catch (const afdm::ConfigError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
