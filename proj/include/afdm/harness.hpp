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

// harness.hpp - Monte Carlo experiment orchestration.
//
// One trial draws a channel, a phase-noise trajectory, data bits and a unit
// noise vector from a stream seeded by (seed, trial). The same draw is reused
// at every SNR point and only rescaled, and every estimator in a trial sees
// the identical received vector.

#pragma once

#include "afdm/baselines.hpp"
#include "afdm/channel.hpp"
#include "afdm/detection.hpp"
#include "afdm/estimator.hpp"
#include "afdm/modem.hpp"
#include "afdm/phasenoise.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace afdm
{

enum class EstimatorKind
{
    JpnceSbl,
    OmpNewton,
    OffgridSblFixed,
    OracleLs,
    PerfectCsi,
};

struct EstimatorSpec
{
    EstimatorKind kind = EstimatorKind::JpnceSbl;
    bool pn_compensation = true;

    // "jpnce_sbl", "offgrid_sbl", "omp_newton", "oracle_ls", each optionally
    // suffixed with "_nopn" for the PN-ignorant variant, and "perfect_csi"
    // (true paths, true phase trajectory, true noise variance).
    std::string id() const;
    static EstimatorSpec parse(const std::string &id);
};

struct ChannelParams
{
    int paths = 3;
    int l_max = 12;
    int k_max = 3;
    bool on_grid = false;
};

struct PnParams
{
    bool enabled = true; // impairment present in the data
    double sigma2 = 1e-4;
    int L = 16;
};

struct PilotParams
{
    int count = 5;
    double boost_db = 30.0;
    std::vector<int> indices; // empty: evenly spaced
};

struct ExperimentConfig
{
    AfdmConfig waveform;
    double carrier_hz = 30e9;
    ChannelParams channel;
    PnParams pn;
    GridSpec grid;
    SblHyperParams sbl;
    PilotParams pilot;
    bool data_symbols = true;

    std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
    int trials = 500;
    std::uint64_t seed = 1;
    std::vector<EstimatorSpec> estimators;
    bool record_runtime = false;

    // Throws ConfigError naming the offending field.
    void validate() const;
    std::vector<int> pilot_indices() const;
    std::vector<int> data_indices() const;
};

// Preset names and their configuration text.
std::vector<std::string> preset_names();
std::string preset_text(const std::string &name);

// Sectioned key/value text (INI). Unknown sections or keys are rejected.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);
std::string format_config(const ExperimentConfig &cfg);

struct Frame
{
    CVec x;            // full DAF-domain frame
    CVec pilot_only;   // pilots, zeros elsewhere
    CVec s_pilot;      // idaft(pilot_only)
    std::vector<std::uint8_t> bits;
    std::vector<bool> pilot_mask;
};

Frame build_frame(const ExperimentConfig &cfg, Rng &rng);

// Everything random about one trial, before the noise is scaled.
struct Scenario
{
    PathSet paths;
    RVec phase;       // zeros when PN is disabled
    Frame frame;
    CVec clean;       // P (channel) s after prefix removal
    CVec unit_noise;  // CN(0, 1) samples
    double signal_power = 0.0;
};

Rng trial_rng(std::uint64_t seed, int trial);
Scenario draw_scenario(const ExperimentConfig &cfg, int trial);

// Received vector at the given SNR and the noise variance that implies.
CVec received_at(const Scenario &sc, double snr_db, double *noise_var = nullptr);

struct MetricRow
{
    std::string estimator;
    double snr_db = 0.0;
    int trial = 0;
    double nmse_channel = 0.0;
    double pn_mse = 0.0;
    double ber = 0.0; // NaN when the frame carries no data
    int iterations = 0;
    int p_hat = 0;
    double runtime_ms = 0.0;
    bool failed = false;
};

struct TrialRecord
{
    MetricRow row;
    Diagnostics diag;
    RVec phi_true;
    RVec phi_hat;
};

// One row per configured estimator, in configuration order.
std::vector<TrialRecord> run_trial_detailed(const ExperimentConfig &cfg, double snr_db, int trial);
std::vector<MetricRow> run_trial(const ExperimentConfig &cfg, double snr_db, int trial);

// Runs one estimator on a received vector; shared by the harness and tests.
ChannelEstimate run_estimator(const EstimatorSpec &spec, const ExperimentConfig &cfg, const CVec &r,
                              const Scenario &sc, double noise_var);

// ||a H_est - H_true||_F^2 / ||H_true||_F^2 with |a| = 1 chosen optimally.
// Returns NaN when H_true is zero.
double nmse_channel(const CMat &H_est, const CMat &H_true);

// Mean squared error after removing the constant offset.
double pn_mse(const RVec &phi_hat, const RVec &phi_true);

struct SweepOptions
{
    int workers = 1;
    std::optional<std::filesystem::path> diagnostics; // JSON lines
    std::optional<std::filesystem::path> trajectory;  // n, phi_true, phi_hat for trial 0
};

// Writes the CSV through a "<out>.partial" file that is renamed on success.
// Rows are ordered by (snr, trial, estimator) whatever the worker count.
void run_sweep(const ExperimentConfig &cfg, const std::filesystem::path &out, const SweepOptions &opts = {});

std::string csv_header();
std::string csv_line(const MetricRow &row);

} // namespace afdm
