#include "fmqkd/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fmqkd {

double transmittance_from_db(double loss_db) {
    if (std::isnan(loss_db) || loss_db < 0.0)
        throw ConfigError("transmittance_from_db: loss must be nonnegative, got " +
                          std::to_string(loss_db));
    return std::pow(10.0, -loss_db / 10.0);
}

double ProtocolParams::arm_transmittance_a() const {
    return transmittance_from_db(channel_loss_db_a + charlie_loss_db);
}

double ProtocolParams::arm_transmittance_b() const {
    return transmittance_from_db(channel_loss_db_b + charlie_loss_db);
}

double ProtocolParams::vac_intensity() const {
    if (std::isinf(extinction_db)) return 0.0;
    return mu * transmittance_from_db(extinction_db);
}

double ProtocolParams::intensity_of(IntensityClass c) const {
    switch (c) {
        case IntensityClass::vac: return vac_intensity();
        case IntensityClass::decoy: return nu;
        case IntensityClass::signal: return mu;
    }
    return 0.0;
}

namespace {

[[noreturn]] void fail(const std::string& name, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    throw ConfigError("invalid parameters: " + name + " (value " + buf + ")");
}

}  // namespace

ProtocolParams validate(const ProtocolParams& p) {
    if (p.d < 2) fail("D >= 2", p.d);
    if (p.d % 2 != 0) fail("D even (X sifting needs the pi slice on the grid)", p.d);
    if (!(p.nu > 0.0)) fail("nu > 0", p.nu);
    if (!(p.nu < p.mu)) fail("nu < mu", p.nu);
    if (!(p.mu < 1.0)) fail("mu < 1", p.mu);
    if (!(p.p_mu >= 0.0)) fail("p_mu >= 0", p.p_mu);
    if (!(p.p_nu >= 0.0)) fail("p_nu >= 0", p.p_nu);
    if (!(p.p_mu + p.p_nu <= 1.0)) fail("p_mu + p_nu <= 1 (probabilities exceed 1)", p.p_mu + p.p_nu);
    if (!(p.rep_rate_hz > 0.0)) fail("rep_rate_hz > 0", p.rep_rate_hz);
    if (!(p.channel_loss_db_a >= 0.0)) fail("channel_loss_db_a >= 0", p.channel_loss_db_a);
    if (!(p.channel_loss_db_b >= 0.0)) fail("channel_loss_db_b >= 0", p.channel_loss_db_b);
    if (!(p.charlie_loss_db >= 0.0)) fail("charlie_loss_db >= 0", p.charlie_loss_db);
    if (!(p.det_efficiency >= 0.0 && p.det_efficiency <= 1.0)) fail("det_efficiency in [0,1]", p.det_efficiency);
    if (!(p.dark_rate_hz >= 0.0)) fail("dark_rate_hz >= 0", p.dark_rate_hz);
    if (!(p.p_dark() < 1.0)) fail("dark_rate_hz / rep_rate_hz < 1", p.p_dark());
    if (!(p.f_ec > 0.0)) fail("f_ec > 0", p.f_ec);
    if (!(p.l_max_s >= 0.0)) fail("l_max_s >= 0", p.l_max_s);
    if (!(p.laser_linewidth_hz >= 0.0)) fail("laser_linewidth_hz >= 0", p.laser_linewidth_hz);
    if (!(p.delta_f0_hz >= 0.0)) fail("delta_f0_hz >= 0 (beat phase advances upward)", p.delta_f0_hz);
    // the per-round phase step must stay below pi or beat edges alias
    const double f_end = p.delta_f0_hz + p.delta_f_drift_hz_per_s * p.duration_s();
    if (!(p.delta_f0_hz < 0.5 * p.rep_rate_hz)) fail("delta_f0_hz < rep_rate_hz / 2", p.delta_f0_hz);
    if (!(f_end >= 0.0 && f_end < 0.5 * p.rep_rate_hz)) fail("delta_f stays in [0, rep_rate_hz/2) over the run", f_end);
    if (!(p.extinction_db > 0.0)) fail("extinction_db > 0", p.extinction_db);
    if (!(p.phase_jitter_rad >= 0.0)) fail("phase_jitter_rad >= 0", p.phase_jitter_rad);
    if (!(p.classical_quantum_phase_offset_rad == p.classical_quantum_phase_offset_rad))
        fail("classical_quantum_phase_offset_rad finite", p.classical_quantum_phase_offset_rad);
    if (!(p.detector_dead_time_s >= 0.0)) fail("detector_dead_time_s >= 0", p.detector_dead_time_s);
    if (!(p.beat_window_s > 0.0)) fail("beat_window_s > 0", p.beat_window_s);
    if (p.block_rounds < 1) fail("block_rounds >= 1", static_cast<double>(p.block_rounds));
    if (p.drift_block_rounds < 1) fail("drift_block_rounds >= 1", static_cast<double>(p.drift_block_rounds));
    if (p.lp_cutoff < 4) fail("lp_cutoff >= 4", p.lp_cutoff);
    if (!(p.lp_slack_sigma >= 0.0)) fail("lp_slack_sigma >= 0", p.lp_slack_sigma);
    return p;
}

const char* to_string(IntensityClass c) {
    switch (c) {
        case IntensityClass::vac: return "vac";
        case IntensityClass::decoy: return "decoy";
        case IntensityClass::signal: return "signal";
    }
    return "?";
}
const char* to_string(PairingStrategy s) {
    return s == PairingStrategy::greedy ? "greedy" : "maxmatch";
}
const char* to_string(XSifting s) {
    return s == XSifting::strict ? "strict" : "adjacent";
}
const char* to_string(EcSumBasis s) {
    return s == EcSumBasis::z_only ? "z" : "all";
}
const char* to_string(CompensationMode s) {
    return s == CompensationMode::beatnote ? "beatnote" : "none";
}
const char* to_string(EdgeSynthMode s) {
    switch (s) {
        case EdgeSynthMode::events: return "events";
        case EdgeSynthMode::full: return "full";
        case EdgeSynthMode::off: return "off";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse real '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
    return x;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
    // accept scientific notation for round counts (e.g. 1e9)
    const double x = parse_real(key, v);
    if (!(x >= 0.0) || x > 1.8e19 || x != std::floor(x))
        throw ConfigError("config key '" + key + "': expected nonnegative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

template <typename T>
T parse_enum(const std::string& key, const std::string& v,
             std::initializer_list<std::pair<const char*, T>> options) {
    for (const auto& [name, val] : options)
        if (v == name) return val;
    std::string allowed;
    for (const auto& [name, val] : options) allowed += std::string(name) + " ";
    throw ConfigError("config key '" + key + "': unknown value '" + v + "' (allowed: " + allowed + ")");
}

}  // namespace

ProtocolParams parse_config_text(const std::string& text, const std::string& origin) {
    ProtocolParams p;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;
    auto real_key = [&](const char* k, double& field) {
        setters[k] = [&field](const std::string& key, const std::string& v) { field = parse_real(key, v); };
    };
    auto count_key = [&](const char* k, std::uint64_t& field) {
        setters[k] = [&field](const std::string& key, const std::string& v) { field = parse_count(key, v); };
    };
    setters["D"] = [&p](const std::string& key, const std::string& v) {
        p.d = static_cast<int>(parse_count(key, v));
    };
    real_key("mu", p.mu);
    real_key("nu", p.nu);
    real_key("p_mu", p.p_mu);
    real_key("p_nu", p.p_nu);
    real_key("rep_rate_hz", p.rep_rate_hz);
    real_key("channel_loss_db_a", p.channel_loss_db_a);
    real_key("channel_loss_db_b", p.channel_loss_db_b);
    real_key("charlie_loss_db", p.charlie_loss_db);
    real_key("det_efficiency", p.det_efficiency);
    real_key("dark_rate_hz", p.dark_rate_hz);
    real_key("f_ec", p.f_ec);
    real_key("l_max_s", p.l_max_s);
    count_key("n_rounds", p.n_rounds);
    real_key("laser_linewidth_hz", p.laser_linewidth_hz);
    real_key("delta_f0_hz", p.delta_f0_hz);
    real_key("delta_f_drift_hz_per_s", p.delta_f_drift_hz_per_s);
    count_key("seed", p.seed);
    real_key("extinction_db", p.extinction_db);
    real_key("phase_jitter_rad", p.phase_jitter_rad);
    real_key("classical_quantum_phase_offset_rad", p.classical_quantum_phase_offset_rad);
    real_key("detector_dead_time_s", p.detector_dead_time_s);
    real_key("beat_window_s", p.beat_window_s);
    count_key("block_rounds", p.block_rounds);
    count_key("drift_block_rounds", p.drift_block_rounds);
    setters["lp_cutoff"] = [&p](const std::string& key, const std::string& v) {
        p.lp_cutoff = static_cast<int>(parse_count(key, v));
    };
    real_key("lp_slack_sigma", p.lp_slack_sigma);
    setters["pairing_strategy"] = [&p](const std::string& key, const std::string& v) {
        p.pairing_strategy = parse_enum<PairingStrategy>(key, v,
            {{"greedy", PairingStrategy::greedy}, {"maxmatch", PairingStrategy::max_matching}});
    };
    setters["x_sifting"] = [&p](const std::string& key, const std::string& v) {
        p.x_sifting = parse_enum<XSifting>(key, v,
            {{"strict", XSifting::strict}, {"adjacent", XSifting::adjacent}});
    };
    setters["ec_sum_basis"] = [&p](const std::string& key, const std::string& v) {
        p.ec_sum_basis = parse_enum<EcSumBasis>(key, v,
            {{"z", EcSumBasis::z_only}, {"all", EcSumBasis::all_bases}});
    };
    setters["compensation_mode"] = [&p](const std::string& key, const std::string& v) {
        p.compensation_mode = parse_enum<CompensationMode>(key, v,
            {{"beatnote", CompensationMode::beatnote}, {"none", CompensationMode::none}});
    };
    setters["edge_mode"] = [&p](const std::string& key, const std::string& v) {
        p.edge_mode = parse_enum<EdgeSynthMode>(key, v,
            {{"events", EdgeSynthMode::events}, {"full", EdgeSynthMode::full}, {"off", EdgeSynthMode::off}});
    };

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        it->second(key, value);
    }
    return p;
}

ProtocolParams load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_to_text(const ProtocolParams& p) {
    std::ostringstream out;
    char buf[64];
    auto real = [&](const char* k, double v) {
        if (std::isinf(v)) {
            out << k << " = inf\n";
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << k << " = " << buf << "\n";
        }
    };
    auto count = [&](const char* k, std::uint64_t v) { out << k << " = " << v << "\n"; };
    count("D", static_cast<std::uint64_t>(p.d));
    real("mu", p.mu);
    real("nu", p.nu);
    real("p_mu", p.p_mu);
    real("p_nu", p.p_nu);
    real("rep_rate_hz", p.rep_rate_hz);
    real("channel_loss_db_a", p.channel_loss_db_a);
    real("channel_loss_db_b", p.channel_loss_db_b);
    real("charlie_loss_db", p.charlie_loss_db);
    real("det_efficiency", p.det_efficiency);
    real("dark_rate_hz", p.dark_rate_hz);
    real("f_ec", p.f_ec);
    real("l_max_s", p.l_max_s);
    count("n_rounds", p.n_rounds);
    real("laser_linewidth_hz", p.laser_linewidth_hz);
    real("delta_f0_hz", p.delta_f0_hz);
    real("delta_f_drift_hz_per_s", p.delta_f_drift_hz_per_s);
    count("seed", p.seed);
    real("extinction_db", p.extinction_db);
    real("phase_jitter_rad", p.phase_jitter_rad);
    real("classical_quantum_phase_offset_rad", p.classical_quantum_phase_offset_rad);
    real("detector_dead_time_s", p.detector_dead_time_s);
    real("beat_window_s", p.beat_window_s);
    count("block_rounds", p.block_rounds);
    count("drift_block_rounds", p.drift_block_rounds);
    out << "pairing_strategy = " << to_string(p.pairing_strategy) << "\n";
    out << "x_sifting = " << to_string(p.x_sifting) << "\n";
    count("lp_cutoff", static_cast<std::uint64_t>(p.lp_cutoff));
    real("lp_slack_sigma", p.lp_slack_sigma);
    out << "ec_sum_basis = " << to_string(p.ec_sum_basis) << "\n";
    out << "compensation_mode = " << to_string(p.compensation_mode) << "\n";
    out << "edge_mode = " << to_string(p.edge_mode) << "\n";
    return out.str();
}

}  // namespace fmqkd
