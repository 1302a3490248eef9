#include "fmqkd/optics_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fmqkd {

std::pair<double, double> detector_means(double i_a, double i_b, double delta_phi) {
    if (!(i_a >= 0.0) || !(i_b >= 0.0))
        throw std::domain_error("detector_means: intensities must be nonnegative");
    const double total = i_a + i_b;
    const double cross = std::sqrt(i_a * i_b) * std::cos(delta_phi);
    // larger port first, complement via Sterbenz-exact subtraction
    double big = 0.5 * total + std::fabs(cross);
    if (big > total) big = total;
    const double small = total - big;
    if (cross >= 0.0) return {big, small};
    return {small, big};
}

double click_probability(double lambda, double det_efficiency, double p_dark) {
    if (!(lambda >= 0.0)) throw std::domain_error("click_probability: lambda must be nonnegative");
    if (!(p_dark >= 0.0 && p_dark < 1.0)) throw std::domain_error("click_probability: p_dark must be in [0,1)");
    return -std::expm1(std::log1p(-p_dark) - det_efficiency * lambda);
}

bool click_sample(double lambda, double det_efficiency, double p_dark, Prng& rng) {
    return rng.uniform() < click_probability(lambda, det_efficiency, p_dark);
}

RoundChoice sample_round_choice(const ProtocolParams& p, Prng& rng) {
    const double u = rng.uniform();
    IntensityClass c = IntensityClass::signal;
    if (u < p.p_vac())
        c = IntensityClass::vac;
    else if (u < p.p_vac() + p.p_nu)
        c = IntensityClass::decoy;
    const auto k = static_cast<std::uint8_t>(rng.below(static_cast<std::uint32_t>(p.d)));
    return {c, k};
}

// ---------------------------------------------------------------------------
// PhasePath

PhasePath::PhasePath(const ProtocolParams& p, int threads) {
    seed_ = p.seed;
    n_rounds_ = p.n_rounds;
    block_rounds_ = std::max<std::uint64_t>(1, p.block_rounds);
    n_blocks_ = (n_rounds_ + block_rounds_ - 1) / block_rounds_;
    dt_ = p.round_dt_s();
    delta_f0_ = p.delta_f0_hz;
    drift_ = p.delta_f_drift_hz_per_s;
    sigma_round_ = std::sqrt(kTwoPi * (2.0 * p.laser_linewidth_hz) * dt_);

    // per-block diffusion sums, then a serial prefix for the checkpoints
    std::vector<double> sums(n_blocks_, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks_); ++b) {
        Prng g(seed_, RngStream::phase, static_cast<std::uint64_t>(b));
        const std::uint64_t n = block_n_rounds(static_cast<std::uint64_t>(b));
        double s = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) s += sigma_round_ * g.gaussian();
        sums[static_cast<std::uint64_t>(b)] = s;
    }
    checkpoint_.resize(n_blocks_ + 1);
    checkpoint_[0] = 0.0;
    for (std::uint64_t b = 0; b < n_blocks_; ++b) checkpoint_[b + 1] = checkpoint_[b] + sums[b];
}

std::uint64_t PhasePath::block_n_rounds(std::uint64_t b) const {
    const std::uint64_t first = b * block_rounds_;
    return std::min(block_rounds_, n_rounds_ - std::min(n_rounds_, first));
}

void PhasePath::block_w(std::uint64_t b, std::vector<double>& out) const {
    const std::uint64_t n = block_n_rounds(b);
    out.resize(n + 1);
    Prng g(seed_, RngStream::phase, b);
    double w = checkpoint_[b];
    out[0] = w;
    for (std::uint64_t i = 0; i < n; ++i) {
        w += sigma_round_ * g.gaussian();
        out[i + 1] = w;
    }
}

double PhasePath::cycles_at(std::uint64_t i) const {
    const double t = static_cast<double>(i) * dt_;
    return (delta_f0_ + 0.5 * drift_ * t) * t;
}

double PhasePath::cycles_between(std::uint64_t round_a, std::uint64_t round_b) const {
    // evaluated as a difference to keep precision over long runs
    const double ta = static_cast<double>(round_a) * dt_;
    const double dtab = (static_cast<double>(round_b) - static_cast<double>(round_a)) * dt_;
    return dtab * (delta_f0_ + drift_ * (ta + 0.5 * dtab));
}

namespace {

inline double mod_two_pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

}  // namespace

void PhasePath::block_theta_mod(std::uint64_t b, std::vector<double>& out) const {
    const std::uint64_t n = block_n_rounds(b);
    const std::uint64_t first = b * block_rounds_;
    std::vector<double> w;
    block_w(b, w);
    out.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double c = cycles_at(first + i);
        const double frac = c - std::floor(c);
        out[i] = mod_two_pi(kTwoPi * frac + std::fmod(w[i], kTwoPi));
    }
}

double PhasePath::theta_mod_2pi(std::uint64_t round_index) const {
    const std::uint64_t b = round_index / block_rounds_;
    std::vector<double> w;
    block_w(b, w);
    const double c = cycles_at(round_index);
    const double frac = c - std::floor(c);
    return mod_two_pi(kTwoPi * frac + std::fmod(w[round_index - b * block_rounds_], kTwoPi));
}

// ---------------------------------------------------------------------------
// Round kernel

namespace {

struct SimContext {
    double p_vac_cut = 0.0, p_decoy_cut = 0.0;
    double arr_a[3] = {0, 0, 0}, arr_b[3] = {0, 0, 0};  // arriving intensities per class
    double slice = 0.0;                                 // 2*pi / D
    double eff = 0.0;
    double p_dark = 0.0, log1m_pd = 0.0;
    double jitter = 0.0;
    std::uint32_t d = 16;
    std::int64_t dead_rounds = 0;
};

SimContext make_context(const ProtocolParams& p) {
    SimContext c;
    c.p_vac_cut = p.p_vac();
    c.p_decoy_cut = p.p_vac() + p.p_nu;
    const double eta_a = p.arm_transmittance_a();
    const double eta_b = p.arm_transmittance_b();
    for (int k = 0; k < 3; ++k) {
        const double src = p.intensity_of(static_cast<IntensityClass>(k));
        c.arr_a[k] = src * eta_a;
        c.arr_b[k] = src * eta_b;
    }
    c.slice = kTwoPi / p.d;
    c.eff = p.det_efficiency;
    c.p_dark = p.p_dark();
    c.log1m_pd = std::log1p(-c.p_dark);
    c.jitter = p.phase_jitter_rad;
    c.d = static_cast<std::uint32_t>(p.d);
    c.dead_rounds = static_cast<std::int64_t>(std::ceil(p.detector_dead_time_s * p.rep_rate_hz));
    return c;
}

// Draw order per round: alice class, alice phase, bob class, bob phase,
// [jitter a, jitter b], click l, click r.
inline void run_round(const SimContext& c, double theta, Prng& g, RoundChoice& a, RoundChoice& b,
                      bool& cl, bool& cr) {
    const double ua = g.uniform();
    a.intensity_class = ua < c.p_vac_cut
                            ? IntensityClass::vac
                            : (ua < c.p_decoy_cut ? IntensityClass::decoy : IntensityClass::signal);
    a.phase_index = static_cast<std::uint8_t>(g.below(c.d));
    const double ub = g.uniform();
    b.intensity_class = ub < c.p_vac_cut
                            ? IntensityClass::vac
                            : (ub < c.p_decoy_cut ? IntensityClass::decoy : IntensityClass::signal);
    b.phase_index = static_cast<std::uint8_t>(g.below(c.d));

    double mod_diff = c.slice * (static_cast<double>(a.phase_index) - static_cast<double>(b.phase_index));
    if (c.jitter > 0.0) mod_diff += c.jitter * (g.gaussian() - g.gaussian());

    const double ia = c.arr_a[static_cast<int>(a.intensity_class)];
    const double ib = c.arr_b[static_cast<int>(b.intensity_class)];
    double pl, pr;
    if (ia == 0.0 && ib == 0.0) {
        pl = pr = c.p_dark;
    } else {
        double lam_l, lam_r;
        if (ia == 0.0 || ib == 0.0) {
            lam_l = lam_r = 0.5 * (ia + ib);
        } else {
            const double total = ia + ib;
            const double cross = std::sqrt(ia * ib) * std::cos(mod_diff - theta);
            double big = 0.5 * total + std::fabs(cross);
            if (big > total) big = total;
            const double small = total - big;
            lam_l = cross >= 0.0 ? big : small;
            lam_r = cross >= 0.0 ? small : big;
        }
        pl = -std::expm1(c.log1m_pd - c.eff * lam_l);
        pr = -std::expm1(c.log1m_pd - c.eff * lam_r);
    }
    cl = g.uniform() < pl;
    cr = g.uniform() < pr;
}

struct BlockOutput {
    std::vector<ClickEvent> clicks;
    SimCounts counts;
};

void simulate_block(const ProtocolParams& p, const SimContext& c, const PhasePath& phase,
                    std::uint64_t b, std::vector<double>& theta_buf, BlockOutput& out) {
    const std::uint64_t first = phase.block_first_round(b);
    const std::uint64_t n = phase.block_n_rounds(b);
    phase.block_theta_mod(b, theta_buf);
    Prng g(p.seed, RngStream::rounds, b);
    // dead-time bookkeeping restarts at the block boundary (the dead window
    // is ns-scale against >100 us blocks)
    std::int64_t last_l = std::numeric_limits<std::int64_t>::min() / 2;
    std::int64_t last_r = last_l;
    out.counts.n_rounds += n;
    for (std::uint64_t i = 0; i < n; ++i) {
        RoundChoice a, bo;
        bool cl = false, cr = false;
        run_round(c, theta_buf[i], g, a, bo, cl, cr);
        const auto idx = static_cast<std::int64_t>(first + i);
        if (c.dead_rounds > 0) {
            if (cl) {
                if (idx - last_l <= c.dead_rounds) cl = false;
                else last_l = idx;
            }
            if (cr) {
                if (idx - last_r <= c.dead_rounds) cr = false;
                else last_r = idx;
            }
        }
        if (cl) ++out.counts.clicks_l;
        if (cr) ++out.counts.clicks_r;
        if (cl != cr) ++out.counts.singles;
        if (cl && cr) ++out.counts.doubles;
        if (cl || cr) out.clicks.push_back({first + i, a, bo, cl, cr});
    }
}

}  // namespace

SimResult simulate(const ProtocolParams& p, const PhasePath& phase, int threads) {
    const SimContext c = make_context(p);
    const auto nb = static_cast<std::int64_t>(phase.n_blocks());
    std::vector<BlockOutput> blocks(static_cast<std::size_t>(nb));
#ifdef _OPENMP
#pragma omp parallel num_threads(threads > 0 ? threads : omp_get_max_threads())
    {
        std::vector<double> theta_buf;
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < nb; ++b)
            simulate_block(p, c, phase, static_cast<std::uint64_t>(b), theta_buf,
                           blocks[static_cast<std::size_t>(b)]);
    }
#else
    (void)threads;
    std::vector<double> theta_buf;
    for (std::int64_t b = 0; b < nb; ++b)
        simulate_block(p, c, phase, static_cast<std::uint64_t>(b), theta_buf,
                       blocks[static_cast<std::size_t>(b)]);
#endif
    SimResult r;
    std::size_t total = 0;
    for (const auto& blk : blocks) total += blk.clicks.size();
    r.clicks.reserve(total);
    for (auto& blk : blocks) {
        r.clicks.insert(r.clicks.end(), blk.clicks.begin(), blk.clicks.end());
        r.counts.add(blk.counts);
    }
    return r;
}

SimResult simulate_serial(const ProtocolParams& p, const PhasePath& phase) {
    const SimContext c = make_context(p);
    SimResult r;
    std::vector<double> theta_buf;
    for (std::uint64_t b = 0; b < phase.n_blocks(); ++b) {
        BlockOutput out;
        simulate_block(p, c, phase, b, theta_buf, out);
        r.clicks.insert(r.clicks.end(), out.clicks.begin(), out.clicks.end());
        r.counts.add(out.counts);
    }
    return r;
}

void simulate_stream(const ProtocolParams& p, const PhasePath& phase,
                     const std::function<void(const RoundRecord&)>& sink) {
    const SimContext c = make_context(p);
    std::vector<double> theta_buf;
    for (std::uint64_t b = 0; b < phase.n_blocks(); ++b) {
        const std::uint64_t first = phase.block_first_round(b);
        const std::uint64_t n = phase.block_n_rounds(b);
        phase.block_theta_mod(b, theta_buf);
        Prng g(p.seed, RngStream::rounds, b);
        for (std::uint64_t i = 0; i < n; ++i) {
            RoundRecord rec;
            rec.round_index = first + i;
            rec.t = static_cast<double>(first + i) * p.round_dt_s();
            run_round(c, theta_buf[i], g, rec.alice, rec.bob, rec.click_l, rec.click_r);
            sink(rec);
        }
    }
}

}  // namespace fmqkd
