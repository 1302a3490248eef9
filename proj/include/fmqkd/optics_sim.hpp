#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "fmqkd/params.hpp"
#include "fmqkd/rng.hpp"

namespace fmqkd {

// One user's per-round source setting. Vacuum rounds still draw a phase
// index; it is announced but carries no light.
struct RoundChoice {
    IntensityClass intensity_class = IntensityClass::vac;
    std::uint8_t phase_index = 0;
};

struct RoundRecord {
    std::uint64_t round_index = 0;
    double t = 0.0;  // seconds, round_index / rep_rate
    RoundChoice alice, bob;
    bool click_l = false, click_r = false;
};

// Round with at least one detector click; all the simulator keeps.
struct ClickEvent {
    std::uint64_t round_index = 0;
    RoundChoice alice, bob;
    bool click_l = false, click_r = false;
};

struct SimCounts {
    std::uint64_t n_rounds = 0;
    std::uint64_t clicks_l = 0, clicks_r = 0;
    std::uint64_t singles = 0, doubles = 0;
    void add(const SimCounts& o) {
        n_rounds += o.n_rounds;
        clicks_l += o.clicks_l;
        clicks_r += o.clicks_r;
        singles += o.singles;
        doubles += o.doubles;
    }
};

struct SimResult {
    std::vector<ClickEvent> clicks;  // ascending round_index
    SimCounts counts;
};

// Mean photon numbers behind a balanced beam splitter fed with coherent
// amplitudes of mean photon number i_a, i_b and differential phase delta_phi:
//   lambda_l = (i_a+i_b)/2 + sqrt(i_a i_b) cos(delta_phi)
//   lambda_r = (i_a+i_b)/2 - sqrt(i_a i_b) cos(delta_phi)
// The smaller port is computed as (i_a+i_b) - larger port, so
// lambda_l + lambda_r == i_a + i_b holds to the last bit.
std::pair<double, double> detector_means(double i_a, double i_b, double delta_phi);

// Threshold detector: P(click) = 1 - (1 - p_dark) exp(-det_efficiency * lambda)
double click_probability(double lambda, double det_efficiency, double p_dark);
bool click_sample(double lambda, double det_efficiency, double p_dark, Prng& rng);

RoundChoice sample_round_choice(const ProtocolParams& p, Prng& rng);

// Ground-truth differential phase of the two lasers, theta(t): a 2*pi*df(t)*t
// ramp plus Wiener diffusion with increment variance 2*pi*(lw_a+lw_b)*dt.
// By convention theta advances upward at delta_f0_hz >= 0; the photodiode
// sees cos(theta + classical offset) and the quantum differential phase of a
// round is (modulated phase difference) - theta(t). Diffusion is stored as
// per-block checkpoints plus regenerable in-block increments, so any block is
// available in O(block) work independent of the rest. Ground truth feeds edge
// synthesis and oracle tests only; pairing and decoy stages never see it.
class PhasePath {
public:
    explicit PhasePath(const ProtocolParams& p, int threads = 0);

    std::uint64_t n_blocks() const { return n_blocks_; }
    std::uint64_t block_first_round(std::uint64_t b) const { return b * block_rounds_; }
    std::uint64_t block_n_rounds(std::uint64_t b) const;

    double delta_f_at(double t_s) const { return delta_f0_ + drift_ * t_s; }
    double wiener_sigma_per_round() const { return sigma_round_; }

    // Wiener values at the block's round boundaries: out[0..n] where
    // out[0] is the block-start checkpoint and n = block_n_rounds(b).
    void block_w(std::uint64_t b, std::vector<double>& out) const;

    // theta mod 2pi at every round of block b (out.size() == block_n_rounds)
    void block_theta_mod(std::uint64_t b, std::vector<double>& out) const;

    // theta mod 2pi at one round (regenerates the covering block)
    double theta_mod_2pi(std::uint64_t round_index) const;

    // deterministic ramp, in cycles, accumulated between two rounds
    double cycles_between(std::uint64_t round_a, std::uint64_t round_b) const;

    double round_dt_s() const { return dt_; }
    std::uint64_t n_rounds() const { return n_rounds_; }

private:
    double cycles_at(std::uint64_t i) const;

    std::uint64_t seed_ = 0;
    std::uint64_t n_rounds_ = 0, block_rounds_ = 1, n_blocks_ = 0;
    double dt_ = 0.0, delta_f0_ = 0.0, drift_ = 0.0, sigma_round_ = 0.0;
    std::vector<double> checkpoint_;  // W at block starts, size n_blocks_+1
};

// Block-parallel Monte Carlo over all rounds (OpenMP). threads == 0 uses the
// OpenMP default. Output is bit-identical for any thread count.
SimResult simulate(const ProtocolParams& p, const PhasePath& phase, int threads = 0);

// Plain sequential implementation of the same block-structured stream; kept
// as the reference the parallel path is tested against.
SimResult simulate_serial(const ProtocolParams& p, const PhasePath& phase);

// Streams every round, in order, to `sink`. Serial; for tests and dumps.
void simulate_stream(const ProtocolParams& p, const PhasePath& phase,
                     const std::function<void(const RoundRecord&)>& sink);

}  // namespace fmqkd
