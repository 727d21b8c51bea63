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

#include "afdm/harness.hpp"

#include <nlohmann/json.hpp>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace afdm
{
namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RMat basis_for(const ExperimentConfig &cfg)
{
    return PnModel::build(cfg.waveform.N, cfg.pn.sigma2, cfg.pn.L).B;
}

CVec received_with_pn(const CVec &s_core, const PathSet &paths, const RVec &phase, const AfdmConfig &w)
{
    CVec r = remove_cpp(apply_channel(add_cpp(s_core, w), paths, w), w);
    return phase_rotation(phase).cwiseProduct(r);
}

// MMSE detection of the data entries after cancelling the known pilots.
double detect_ber(const ChannelEstimate &est, const ExperimentConfig &cfg, const Scenario &sc, const CVec &r)
{
    const std::vector<int> data = cfg.data_indices();
    if (!cfg.data_symbols || data.empty())
        return kNaN;

    const EffectiveChannel eff = build_effective_channel(est, cfg.waveform);
    const CVec y = daft(r, cfg.waveform) - eff.H * sc.frame.pilot_only;
    CMat Hd(cfg.waveform.N, static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
        Hd.col(static_cast<Eigen::Index>(i)) = eff.H.col(data[i]);

    const double floor = 1e-12 * std::max(sc.signal_power, 1e-300);
    const CVec x = mmse_equalize(y, Hd, std::max(eff.noise_var, floor));
    const std::vector<std::uint8_t> bits = qam_demap(x);
    return count_errors(bits, sc.frame.bits).rate();
}

} // namespace

Frame build_frame(const ExperimentConfig &cfg, Rng &rng)
{
    const int N = cfg.waveform.N;
    const std::vector<int> pilots = cfg.pilot_indices();
    const double amp = std::sqrt(std::pow(10.0, cfg.pilot.boost_db / 10.0));

    Frame f;
    f.x = CVec::Zero(N);
    f.pilot_only = CVec::Zero(N);
    f.pilot_mask.assign(N, false);
    for (int i : pilots)
    {
        if (i < 0 || i >= N || f.pilot_mask[i])
            throw ConfigError("build_frame: pilot index " + std::to_string(i) + " invalid or colliding");
        f.pilot_mask[i] = true;
        f.pilot_only[i] = amp;
    }

    if (cfg.data_symbols)
    {
        const std::size_t n_data = static_cast<std::size_t>(N) - pilots.size();
        f.bits.resize(n_data * kBitsPerSymbol);
        boost::random::uniform_int_distribution<int> bit(0, 1);
        for (auto &b : f.bits)
            b = static_cast<std::uint8_t>(bit(rng));
        const CVec sym = qam_map(f.bits);
        Eigen::Index k = 0;
        for (int m = 0; m < N; ++m)
            if (!f.pilot_mask[m])
                f.x[m] = sym[k++];
    }
    f.x += f.pilot_only;
    f.s_pilot = idaft(f.pilot_only, cfg.waveform);
    return f;
}

Rng trial_rng(std::uint64_t seed, int trial)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), 0x5eedu};
    return Rng(seq);
}

Scenario draw_scenario(const ExperimentConfig &cfg, int trial)
{
    const int N = cfg.waveform.N;
    Rng rng = trial_rng(cfg.seed, trial);

    Scenario sc;
    sc.paths = sample_paths(rng, cfg.channel.paths, cfg.channel.l_max, cfg.channel.k_max, cfg.channel.on_grid,
                            cfg.grid.r_nu);
    sc.phase = cfg.pn.enabled ? sample_wiener(rng, N, cfg.pn.sigma2) : RVec::Zero(N);
    sc.frame = build_frame(cfg, rng);

    boost::random::normal_distribution<double> g(0.0, std::sqrt(0.5));
    sc.unit_noise.resize(N);
    for (int n = 0; n < N; ++n)
    {
        const double re = g(rng);
        const double im = g(rng);
        sc.unit_noise[n] = Complex(re, im);
    }

    sc.clean = received_with_pn(idaft(sc.frame.x, cfg.waveform), sc.paths, sc.phase, cfg.waveform);
    sc.signal_power = sc.clean.squaredNorm() / N;
    return sc;
}

CVec received_at(const Scenario &sc, double snr_db, double *noise_var)
{
    const double nv = std::isinf(snr_db) && snr_db > 0 ? 0.0 : sc.signal_power / std::pow(10.0, snr_db / 10.0);
    if (noise_var)
        *noise_var = nv;
    return sc.clean + std::sqrt(nv) * sc.unit_noise;
}

ChannelEstimate run_estimator(const EstimatorSpec &spec, const ExperimentConfig &cfg, const CVec &r,
                              const Scenario &sc, double noise_var)
{
    const Grid grid(cfg.grid);
    const CVec &pilot = sc.frame.s_pilot;
    const double floor = std::max(noise_var, 1e-15 * sc.signal_power);

    switch (spec.kind)
    {
    case EstimatorKind::JpnceSbl:
        return JpnceSbl(cfg.sbl, EstimatorOptions{spec.pn_compensation, GridMode::Evolve})
            .run(r, pilot, grid, basis_for(cfg));
    case EstimatorKind::OffgridSblFixed:
        return offgrid_sbl_fixed(r, pilot, grid, basis_for(cfg), cfg.sbl, spec.pn_compensation);
    case EstimatorKind::OmpNewton:
        if (spec.pn_compensation)
            return omp_newton_pn(r, pilot, grid, cfg.sbl.max_paths, floor, basis_for(cfg));
        return omp_newton(r, pilot, grid, cfg.sbl.max_paths, floor);
    case EstimatorKind::OracleLs:
        return oracle_ls(r, sc.paths, spec.pn_compensation ? sc.phase : RVec(), pilot, noise_var);
    case EstimatorKind::PerfectCsi:
        return ground_truth_estimate(sc.paths, sc.phase, noise_var);
    }
    throw ConfigError("run_estimator: unknown estimator kind");
}

double nmse_channel(const CMat &H_est, const CMat &H_true)
{
    if (H_est.rows() != H_true.rows() || H_est.cols() != H_true.cols())
        throw DimensionError("nmse_channel: matrices differ in shape");
    const double den = H_true.squaredNorm();
    if (!(den > 0.0))
        return kNaN;
    const Complex inner = (H_est.array().conjugate() * H_true.array()).sum();
    const Complex a = std::abs(inner) > 0.0 ? inner / std::abs(inner) : Complex(1.0, 0.0);
    return (a * H_est - H_true).squaredNorm() / den;
}

double pn_mse(const RVec &phi_hat, const RVec &phi_true)
{
    if (phi_hat.size() != phi_true.size())
        throw DimensionError("pn_mse: trajectories differ in length");
    if (phi_true.size() == 0)
        return 0.0;
    const RVec e = phi_hat - phi_true;
    return (e.array() - e.mean()).square().mean();
}

std::vector<TrialRecord> run_trial_detailed(const ExperimentConfig &cfg, double snr_db, int trial)
{
    const Scenario sc = draw_scenario(cfg, trial);
    double noise_var = 0.0;
    const CVec r = received_at(sc, snr_db, &noise_var);
    const CMat H_true = daf_kernel(sc.paths, sc.phase, cfg.waveform);

    std::vector<TrialRecord> out;
    out.reserve(cfg.estimators.size());
    for (const EstimatorSpec &spec : cfg.estimators)
    {
        TrialRecord rec;
        rec.row.estimator = spec.id();
        rec.row.snr_db = snr_db;
        rec.row.trial = trial;
        rec.phi_true = sc.phase;
        try
        {
            const auto t0 = std::chrono::steady_clock::now();
            const ChannelEstimate est = run_estimator(spec, cfg, r, sc, noise_var);
            const auto t1 = std::chrono::steady_clock::now();

            const EffectiveChannel eff = build_effective_channel(est, cfg.waveform);
            rec.phi_hat = est.phi_hat.size() == sc.phase.size() ? est.phi_hat : RVec::Zero(sc.phase.size());
            rec.diag = est.diag;
            rec.row.nmse_channel = nmse_channel(eff.H, H_true);
            rec.row.pn_mse = pn_mse(rec.phi_hat, sc.phase);
            rec.row.ber = detect_ber(est, cfg, sc, r);
            rec.row.iterations = est.diag.iterations;
            rec.row.p_hat = est.p_hat();
            if (cfg.record_runtime)
                rec.row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            rec.row.failed = !std::isfinite(rec.row.nmse_channel) || !std::isfinite(rec.row.pn_mse);
        }
        catch (const std::exception &)
        {
            rec.row.nmse_channel = kNaN;
            rec.row.pn_mse = kNaN;
            rec.row.ber = kNaN;
            rec.row.failed = true;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<MetricRow> run_trial(const ExperimentConfig &cfg, double snr_db, int trial)
{
    std::vector<MetricRow> rows;
    for (TrialRecord &rec : run_trial_detailed(cfg, snr_db, trial))
        rows.push_back(std::move(rec.row));
    return rows;
}

std::string csv_header()
{
    return "estimator,snr_db,trial,nmse_channel,pn_mse,ber,iterations,p_hat,runtime_ms,status";
}

std::string csv_line(const MetricRow &row)
{
    return row.estimator + "," + fmt17(row.snr_db) + "," + std::to_string(row.trial) + "," + fmt17(row.nmse_channel) +
           "," + fmt17(row.pn_mse) + "," + fmt17(row.ber) + "," + std::to_string(row.iterations) + "," +
           std::to_string(row.p_hat) + "," + fmt17(row.runtime_ms) + "," + (row.failed ? "failed" : "ok");
}

void run_sweep(const ExperimentConfig &cfg, const std::filesystem::path &out, const SweepOptions &opts)
{
    cfg.validate();
    const std::size_t n_snr = cfg.snr_db.size();
    const std::size_t n_jobs = n_snr * static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<TrialRecord>> results(n_jobs);

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t j = next++; j < n_jobs; j = next++)
        {
            try
            {
                results[j] = run_trial_detailed(cfg, cfg.snr_db[j / cfg.trials], static_cast<int>(j % cfg.trials));
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error)
                    first_error = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, opts.workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);

    std::filesystem::path partial = out;
    partial += ".partial";
    {
        std::ofstream f(partial, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("run_sweep: cannot open '" + partial.string() + "' for writing");
        f << csv_header() << '\n';
        for (const auto &job : results)
            for (const TrialRecord &rec : job)
                f << csv_line(rec.row) << '\n';
        f.flush();
        if (!f)
            throw std::runtime_error("run_sweep: write to '" + partial.string() + "' failed; partial file left");
    }
    std::filesystem::rename(partial, out);

    if (opts.diagnostics)
    {
        std::ofstream f(*opts.diagnostics, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("run_sweep: cannot open '" + opts.diagnostics->string() + "'");
        for (const auto &job : results)
            for (const TrialRecord &rec : job)
            {
                nlohmann::json j{
                    {"estimator", rec.row.estimator},
                    {"snr_db", rec.row.snr_db},
                    {"trial", rec.row.trial},
                    {"failed", rec.row.failed},
                    {"iterations", rec.diag.iterations},
                    {"final_gamma_change", rec.diag.final_gamma_change},
                    {"converged", rec.diag.converged},
                    {"residual_norms", rec.diag.residual_norms},
                    {"clip_count", rec.diag.clip_count},
                    {"jitter_count", rec.diag.jitter_count},
                    {"loading_count", rec.diag.loading_count},
                    {"beta_clamp_count", rec.diag.beta_clamp_count},
                    {"pseudo_inverse_count", rec.diag.pseudo_inverse_count},
                };
                f << j.dump() << '\n';
            }
    }

    if (opts.trajectory)
    {
        std::ofstream f(*opts.trajectory, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("run_sweep: cannot open '" + opts.trajectory->string() + "'");
        f << "estimator,snr_db,n,phi_true,phi_hat\n";
        for (std::size_t s = 0; s < n_snr; ++s)
            for (const TrialRecord &rec : results[s * cfg.trials])
                for (Eigen::Index n = 0; n < rec.phi_true.size(); ++n)
                    f << rec.row.estimator << ',' << fmt17(rec.row.snr_db) << ',' << n << ','
                      << fmt17(rec.phi_true[n]) << ',' << fmt17(n < rec.phi_hat.size() ? rec.phi_hat[n] : 0.0)
                      << '\n';
    }
}

} // namespace afdm
