#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "fmqkd/errors.hpp"

namespace fmqkd {

enum class IntensityClass : std::uint8_t { vac = 0, decoy = 1, signal = 2 };

enum class PairingStrategy : std::uint8_t { greedy, max_matching };
enum class XSifting : std::uint8_t { strict, adjacent };
enum class EcSumBasis : std::uint8_t { z_only, all_bases };
enum class CompensationMode : std::uint8_t { beatnote, none };
enum class EdgeSynthMode : std::uint8_t { events, full, off };

// All tunable physics and protocol constants. Immutable after validate();
// shared read-only by every stage. Config keys mirror the field names
// (see configs/defaults.cfg for the full annotated schema).
struct ProtocolParams {
    // protocol core
    int d = 16;  // config key "D": number of phase slices
    double mu = 0.3958;
    double nu = 0.0275;
    double p_mu = 0.15;
    double p_nu = 0.25;
    double rep_rate_hz = 5.0e8;
    double channel_loss_db_a = 19.415;
    double channel_loss_db_b = 19.415;
    double charlie_loss_db = 1.91;
    double det_efficiency = 0.63;
    double dark_rate_hz = 30.0;
    double f_ec = 1.06;
    double l_max_s = 1.0e-5;
    std::uint64_t n_rounds = 10'000'000;
    double laser_linewidth_hz = 1.0e3;  // per laser; diffusion sums both lasers
    double delta_f0_hz = 2.0e8;
    double delta_f_drift_hz_per_s = 0.0;
    std::uint64_t seed = 1;

    // device-model extensions
    double extinction_db = std::numeric_limits<double>::infinity();
    double phase_jitter_rad = 0.0;
    double classical_quantum_phase_offset_rad = 0.0;
    double detector_dead_time_s = 0.0;

    // post-processing knobs
    double beat_window_s = 5.0e-8;
    std::uint64_t block_rounds = 65536;
    std::uint64_t drift_block_rounds = 15'000'000'000ULL;
    PairingStrategy pairing_strategy = PairingStrategy::greedy;
    XSifting x_sifting = XSifting::strict;
    int lp_cutoff = 10;
    double lp_slack_sigma = 3.0;
    EcSumBasis ec_sum_basis = EcSumBasis::z_only;
    CompensationMode compensation_mode = CompensationMode::beatnote;
    EdgeSynthMode edge_mode = EdgeSynthMode::events;

    // derived helpers
    double p_vac() const { return 1.0 - p_mu - p_nu; }
    double p_dark() const { return dark_rate_hz / rep_rate_hz; }
    double round_dt_s() const { return 1.0 / rep_rate_hz; }
    double duration_s() const { return static_cast<double>(n_rounds) / rep_rate_hz; }

    // transmittance of one arm up to the beam splitter (fiber + Charlie's
    // insertion loss); detector efficiency is applied at click sampling
    double arm_transmittance_a() const;
    double arm_transmittance_b() const;

    // residual intensity of a nominal-vacuum pulse (0 for infinite extinction)
    double vac_intensity() const;
    // source-side mean photon number of one pulse of the given class
    double intensity_of(IntensityClass c) const;

    bool operator==(const ProtocolParams&) const = default;
};

// 10^(-loss_db/10); rejects negative input
double transmittance_from_db(double loss_db);

// Returns the record unchanged if every invariant holds; otherwise throws
// ConfigError naming the first violated invariant and its value.
ProtocolParams validate(const ProtocolParams& p);

// Flat key=value schema; '#' starts a comment; unknown or duplicate keys are
// errors. `origin` is used in error messages.
ProtocolParams parse_config_text(const std::string& text, const std::string& origin);
ProtocolParams load_config(const std::string& path);

// Full snapshot in the config schema; parse_config_text round-trips it.
std::string config_to_text(const ProtocolParams& p);

const char* to_string(IntensityClass c);
const char* to_string(PairingStrategy s);
const char* to_string(XSifting s);
const char* to_string(EcSumBasis s);
const char* to_string(CompensationMode s);
const char* to_string(EdgeSynthMode s);

}  // namespace fmqkd
