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

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace afdm
{
namespace
{

namespace pt = boost::property_tree;

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty())
            return d;
    }
    catch (const std::exception &)
    {
    }
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
}

long long parse_int(const std::string &key, const std::string &v)
{
    long long out = 0;
    const std::string t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string &key, const std::string &v)
{
    std::uint64_t out = 0;
    const std::string t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError("config: '" + key + "' expects an unsigned 64-bit integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string &key, const std::string &v)
{
    std::string t = trim(v);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (t == "true" || t == "yes" || t == "1" || t == "on")
        return true;
    if (t == "false" || t == "no" || t == "0" || t == "off")
        return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::map<std::string, std::set<std::string>> &schema()
{
    static const std::map<std::string, std::set<std::string>> s{
        {"waveform", {"N", "delta_f", "carrier_hz", "c1", "c2", "n_cpp"}},
        {"channel", {"paths", "l_max", "k_max", "on_grid"}},
        {"phase_noise", {"enabled", "sigma2", "L"}},
        {"grid", {"r_tau", "r_nu"}},
        {"sbl", {"rho", "c", "d", "epsilon", "n_iter", "support_threshold", "max_paths", "gamma_rule"}},
        {"pilot", {"count", "boost_db", "indices"}},
        {"frame", {"data_symbols"}},
        {"sweep", {"snr_db", "trials", "seed", "estimators", "record_runtime"}},
    };
    return s;
}

const std::map<std::string, std::string> &presets()
{
    static const std::string common_body = R"([waveform]
N = 64
delta_f = 15000
carrier_hz = 30e9
c1 = auto
c2 = 0
n_cpp = auto

[channel]
paths = 3
l_max = 12
k_max = 3
on_grid = false

[grid]
r_tau = 1
r_nu = 1

[sbl]
rho = 0.01
c = 1e-6
d = 1e-6
epsilon = 1e-4
n_iter = 100
support_threshold = 1e-3
max_paths = auto
gamma_rule = stabilized

[pilot]
count = 5
boost_db = 30

[frame]
data_symbols = true
)";
    static const std::map<std::string, std::string> p{
        {"reference", common_body + R"(
[phase_noise]
enabled = true
sigma2 = 1e-4
L = 16

[sweep]
snr_db = 0, 5, 10, 15, 20, 25, 30
trials = 500
seed = 1
estimators = jpnce_sbl, jpnce_sbl_nopn, offgrid_sbl, offgrid_sbl_nopn, omp_newton_nopn, oracle_ls, perfect_csi
record_runtime = false
)"},
        {"ideal-oscillator", common_body + R"(
[phase_noise]
enabled = false
sigma2 = 1e-4
L = 16

[sweep]
snr_db = 0, 5, 10, 15, 20, 25, 30
trials = 500
seed = 1
estimators = jpnce_sbl, offgrid_sbl_nopn, omp_newton_nopn, oracle_ls, perfect_csi
record_runtime = false
)"},
        {"pn-mild", common_body + R"(
[phase_noise]
enabled = true
sigma2 = 1e-5
L = 16

[sweep]
snr_db = 0, 5, 10, 15, 20, 25, 30
trials = 500
seed = 1
estimators = jpnce_sbl, jpnce_sbl_nopn, offgrid_sbl, oracle_ls
record_runtime = false
)"},
        {"pn-severe", common_body + R"(
[phase_noise]
enabled = true
sigma2 = 1e-3
L = 16

[sweep]
snr_db = 0, 5, 10, 15, 20, 25, 30
trials = 500
seed = 1
estimators = jpnce_sbl, jpnce_sbl_nopn, offgrid_sbl, oracle_ls
record_runtime = false
)"},
        {"smoke", common_body + R"(
[phase_noise]
enabled = true
sigma2 = 1e-4
L = 16

[sweep]
snr_db = 10, 20
trials = 3
seed = 7
estimators = jpnce_sbl, offgrid_sbl_nopn
record_runtime = false
)"},
    };
    return p;
}

} // namespace

// ---------------------------------------------------------------------------

std::string EstimatorSpec::id() const
{
    std::string base;
    switch (kind)
    {
    case EstimatorKind::JpnceSbl:
        base = "jpnce_sbl";
        break;
    case EstimatorKind::OmpNewton:
        base = std::string(to_string(BaselineKind::OmpNewton));
        break;
    case EstimatorKind::OffgridSblFixed:
        base = std::string(to_string(BaselineKind::OffgridSblFixed));
        break;
    case EstimatorKind::OracleLs:
        base = std::string(to_string(BaselineKind::OracleLs));
        break;
    case EstimatorKind::PerfectCsi:
        return "perfect_csi";
    }
    return pn_compensation ? base : base + "_nopn";
}

EstimatorSpec EstimatorSpec::parse(const std::string &raw)
{
    std::string id = trim(raw);
    EstimatorSpec spec;
    const std::string suffix = "_nopn";
    if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0)
    {
        spec.pn_compensation = false;
        id.resize(id.size() - suffix.size());
    }
    if (id == "jpnce_sbl")
        spec.kind = EstimatorKind::JpnceSbl;
    else if (id == "omp_newton")
        spec.kind = EstimatorKind::OmpNewton;
    else if (id == "offgrid_sbl")
        spec.kind = EstimatorKind::OffgridSblFixed;
    else if (id == "oracle_ls")
        spec.kind = EstimatorKind::OracleLs;
    else if (id == "perfect_csi" && spec.pn_compensation)
        spec.kind = EstimatorKind::PerfectCsi;
    else
        throw ConfigError("config: unknown estimator '" + raw + "'");
    return spec;
}

void ExperimentConfig::validate() const
{
    waveform.validate();
    if (channel.paths < 1 || channel.paths > channel.l_max + 1)
        throw ConfigError("config: channel.paths must lie in [1, l_max + 1]");
    if (channel.l_max < 0 || channel.k_max < 0)
        throw ConfigError("config: channel.l_max and channel.k_max must be non-negative");
    if (waveform.n_cpp < channel.l_max)
        throw ConfigError("config: waveform.n_cpp must be >= channel.l_max");
    if (grid.l_max != channel.l_max || grid.k_max != channel.k_max)
        throw ConfigError("config: grid support must match channel.l_max / channel.k_max");
    grid.validate();
    if (!(pn.sigma2 > 0.0))
        throw ConfigError("config: phase_noise.sigma2 must be positive");
    if (pn.L < 1 || pn.L > waveform.N)
        throw ConfigError("config: phase_noise.L must lie in [1, N]");
    sbl.validate();
    if (pilot.count < 1 || pilot.count > waveform.N)
        throw ConfigError("config: pilot.count must lie in [1, N]");
    if (!pilot.indices.empty())
    {
        if (static_cast<int>(pilot.indices.size()) != pilot.count)
            throw ConfigError("config: pilot.indices must list exactly pilot.count entries");
        std::set<int> seen;
        for (int i : pilot.indices)
        {
            if (i < 0 || i >= waveform.N)
                throw ConfigError("config: pilot index " + std::to_string(i) + " outside [0, N)");
            if (!seen.insert(i).second)
                throw ConfigError("config: pilot index " + std::to_string(i) + " collides with another pilot");
        }
    }
    if (trials < 1)
        throw ConfigError("config: sweep.trials must be >= 1");
    if (snr_db.empty())
        throw ConfigError("config: sweep.snr_db must not be empty");
    if (estimators.empty())
        throw ConfigError("config: sweep.estimators must not be empty");
}

std::vector<int> ExperimentConfig::pilot_indices() const
{
    if (!pilot.indices.empty())
        return pilot.indices;
    std::vector<int> idx;
    for (int i = 0; i < pilot.count; ++i)
        idx.push_back(static_cast<int>((static_cast<long long>(i) * waveform.N) / pilot.count));
    return idx;
}

std::vector<int> ExperimentConfig::data_indices() const
{
    const std::vector<int> pil = pilot_indices();
    std::vector<int> out;
    for (int m = 0; m < waveform.N; ++m)
        if (std::find(pil.begin(), pil.end(), m) == pil.end())
            out.push_back(m);
    return out;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto &[name, text] : presets())
        names.push_back(name);
    return names;
}

std::string preset_text(const std::string &name)
{
    const auto it = presets().find(name);
    if (it == presets().end())
        throw ConfigError("unknown preset '" + name + "'");
    return it->second;
}

ExperimentConfig parse_config(const std::string &text)
{
    pt::ptree tree;
    try
    {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }

    const auto &known = schema();
    std::map<std::string, std::string> kv;
    for (const auto &[section, body] : tree)
    {
        const auto sit = known.find(section);
        if (sit == known.end())
            throw ConfigError("config: unknown section [" + section + "]");
        if (!body.data().empty())
            throw ConfigError("config: key '" + section + "' outside of any section");
        for (const auto &[key, value] : body)
        {
            if (!sit->second.count(key))
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            kv[section + "." + key] = trim(value.data());
        }
    }

    auto get = [&](const std::string &key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        return it->second;
    };

    ExperimentConfig cfg;
    if (auto v = get("waveform.N"))
        cfg.waveform.N = static_cast<int>(parse_int("waveform.N", *v));
    if (auto v = get("waveform.delta_f"))
        cfg.waveform.delta_f = parse_double("waveform.delta_f", *v);
    if (auto v = get("waveform.carrier_hz"))
        cfg.carrier_hz = parse_double("waveform.carrier_hz", *v);
    if (auto v = get("waveform.c2"))
        cfg.waveform.c2 = parse_double("waveform.c2", *v);

    if (auto v = get("channel.paths"))
        cfg.channel.paths = static_cast<int>(parse_int("channel.paths", *v));
    if (auto v = get("channel.l_max"))
        cfg.channel.l_max = static_cast<int>(parse_int("channel.l_max", *v));
    if (auto v = get("channel.k_max"))
        cfg.channel.k_max = static_cast<int>(parse_int("channel.k_max", *v));
    if (auto v = get("channel.on_grid"))
        cfg.channel.on_grid = parse_bool("channel.on_grid", *v);

    const auto c1 = get("waveform.c1");
    cfg.waveform.c1 = (!c1 || *c1 == "auto") ? default_c1(cfg.waveform.N, cfg.channel.k_max)
                                             : parse_double("waveform.c1", *c1);
    const auto ncpp = get("waveform.n_cpp");
    cfg.waveform.n_cpp =
        (!ncpp || *ncpp == "auto") ? cfg.channel.l_max : static_cast<int>(parse_int("waveform.n_cpp", *ncpp));

    if (auto v = get("phase_noise.enabled"))
        cfg.pn.enabled = parse_bool("phase_noise.enabled", *v);
    if (auto v = get("phase_noise.sigma2"))
        cfg.pn.sigma2 = parse_double("phase_noise.sigma2", *v);
    if (auto v = get("phase_noise.L"))
        cfg.pn.L = static_cast<int>(parse_int("phase_noise.L", *v));

    cfg.grid.l_max = cfg.channel.l_max;
    cfg.grid.k_max = cfg.channel.k_max;
    if (auto v = get("grid.r_tau"))
        cfg.grid.r_tau = static_cast<int>(parse_int("grid.r_tau", *v));
    if (auto v = get("grid.r_nu"))
        cfg.grid.r_nu = parse_double("grid.r_nu", *v);

    if (auto v = get("sbl.rho"))
        cfg.sbl.rho = parse_double("sbl.rho", *v);
    if (auto v = get("sbl.c"))
        cfg.sbl.c = parse_double("sbl.c", *v);
    if (auto v = get("sbl.d"))
        cfg.sbl.d = parse_double("sbl.d", *v);
    if (auto v = get("sbl.epsilon"))
        cfg.sbl.epsilon = parse_double("sbl.epsilon", *v);
    if (auto v = get("sbl.n_iter"))
        cfg.sbl.n_iter = static_cast<int>(parse_int("sbl.n_iter", *v));
    if (auto v = get("sbl.support_threshold"))
        cfg.sbl.support_threshold = parse_double("sbl.support_threshold", *v);
    const auto mp = get("sbl.max_paths");
    cfg.sbl.max_paths =
        (!mp || *mp == "auto") ? 2 * cfg.channel.paths : static_cast<int>(parse_int("sbl.max_paths", *mp));
    if (auto v = get("sbl.gamma_rule"))
    {
        if (*v == "stabilized")
            cfg.sbl.gamma_rule = GammaRule::Stabilized;
        else if (*v == "literal")
            cfg.sbl.gamma_rule = GammaRule::Literal;
        else
            throw ConfigError("config: sbl.gamma_rule must be 'stabilized' or 'literal'");
    }

    if (auto v = get("pilot.count"))
        cfg.pilot.count = static_cast<int>(parse_int("pilot.count", *v));
    if (auto v = get("pilot.boost_db"))
        cfg.pilot.boost_db = parse_double("pilot.boost_db", *v);
    if (auto v = get("pilot.indices"))
        for (const std::string &item : split_list(*v))
            cfg.pilot.indices.push_back(static_cast<int>(parse_int("pilot.indices", item)));

    if (auto v = get("frame.data_symbols"))
        cfg.data_symbols = parse_bool("frame.data_symbols", *v);

    if (auto v = get("sweep.snr_db"))
    {
        cfg.snr_db.clear();
        for (const std::string &item : split_list(*v))
            cfg.snr_db.push_back(parse_double("sweep.snr_db", item));
    }
    if (auto v = get("sweep.trials"))
        cfg.trials = static_cast<int>(parse_int("sweep.trials", *v));
    if (auto v = get("sweep.seed"))
        cfg.seed = parse_u64("sweep.seed", *v);
    if (auto v = get("sweep.record_runtime"))
        cfg.record_runtime = parse_bool("sweep.record_runtime", *v);
    if (auto v = get("sweep.estimators"))
        for (const std::string &item : split_list(*v))
            cfg.estimators.push_back(EstimatorSpec::parse(item));
    else
        cfg.estimators = {EstimatorSpec::parse("jpnce_sbl")};

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(const ExperimentConfig &cfg)
{
    std::ostringstream o;
    auto join_d = [](const std::vector<double> &v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + fmt_double(v[i]);
        return s;
    };
    o << "[waveform]\nN = " << cfg.waveform.N << "\ndelta_f = " << fmt_double(cfg.waveform.delta_f)
      << "\ncarrier_hz = " << fmt_double(cfg.carrier_hz) << "\nc1 = " << fmt_double(cfg.waveform.c1)
      << "\nc2 = " << fmt_double(cfg.waveform.c2) << "\nn_cpp = " << cfg.waveform.n_cpp << "\n\n";
    o << "[channel]\npaths = " << cfg.channel.paths << "\nl_max = " << cfg.channel.l_max
      << "\nk_max = " << cfg.channel.k_max << "\non_grid = " << (cfg.channel.on_grid ? "true" : "false") << "\n\n";
    o << "[phase_noise]\nenabled = " << (cfg.pn.enabled ? "true" : "false") << "\nsigma2 = " << fmt_double(cfg.pn.sigma2)
      << "\nL = " << cfg.pn.L << "\n\n";
    o << "[grid]\nr_tau = " << cfg.grid.r_tau << "\nr_nu = " << fmt_double(cfg.grid.r_nu) << "\n\n";
    o << "[sbl]\nrho = " << fmt_double(cfg.sbl.rho) << "\nc = " << fmt_double(cfg.sbl.c)
      << "\nd = " << fmt_double(cfg.sbl.d) << "\nepsilon = " << fmt_double(cfg.sbl.epsilon)
      << "\nn_iter = " << cfg.sbl.n_iter << "\nsupport_threshold = " << fmt_double(cfg.sbl.support_threshold)
      << "\nmax_paths = " << cfg.sbl.max_paths << "\ngamma_rule = "
      << (cfg.sbl.gamma_rule == GammaRule::Stabilized ? "stabilized" : "literal") << "\n\n";
    o << "[pilot]\ncount = " << cfg.pilot.count << "\nboost_db = " << fmt_double(cfg.pilot.boost_db);
    if (!cfg.pilot.indices.empty())
    {
        o << "\nindices = ";
        for (std::size_t i = 0; i < cfg.pilot.indices.size(); ++i)
            o << (i ? ", " : "") << cfg.pilot.indices[i];
    }
    o << "\n\n[frame]\ndata_symbols = " << (cfg.data_symbols ? "true" : "false") << "\n\n";
    o << "[sweep]\nsnr_db = " << join_d(cfg.snr_db) << "\ntrials = " << cfg.trials << "\nseed = " << cfg.seed
      << "\nestimators = ";
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i)
        o << (i ? ", " : "") << cfg.estimators[i].id();
    o << "\nrecord_runtime = " << (cfg.record_runtime ? "true" : "false") << "\n";
    return o.str();
}

} // namespace afdm
