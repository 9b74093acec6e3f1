#include "asc/saf.hpp"

#include <cmath>
#include <string>

#include "asc/fft.hpp"

namespace asc {

void SafConfig::validate() const {
    if (subbands < 2 || subbands % 2 != 0)
        throw std::invalid_argument("SafConfig: subbands must be even and >= 2");
    if (fullband_len < 1)
        throw std::invalid_argument("SafConfig: fullband_len must be positive");
    if (fullband_len % subbands != 0)
        throw std::invalid_argument("SafConfig: fullband_len must be divisible by subbands");
    if (!is_pow2(static_cast<std::size_t>(fullband_len)))
        throw std::invalid_argument("SafConfig: fullband_len must be a power of two");
    if (!is_pow2(static_cast<std::size_t>(subband_len())))
        throw std::invalid_argument("SafConfig: fullband_len/decimation must be a power of two");
    if (!(alpha > 0.0))
        throw std::invalid_argument("SafConfig: alpha must be positive");
    if (mu < 0.0) throw std::invalid_argument("SafConfig: mu must be non-negative");
    if (!prototype.taps.empty() &&
        prototype.taps.size() < 2 * static_cast<std::size_t>(subbands))
        throw std::invalid_argument("SafConfig: prototype shorter than 2*subbands");
}

SafConfig SafConfig::resolved() const {
    SafConfig out = *this;
    out.validate();
    if (out.prototype.taps.empty())
        out.prototype = design_prototype(4 * out.subbands, out.subbands);
    return out;
}

SubbandWeights SubbandWeights::zeros(const SafConfig& cfg) {
    SubbandWeights w;
    w.bands.assign(cfg.retained_bands(),
                   std::vector<cplx>(cfg.subband_len(), cplx{0.0, 0.0}));
    return w;
}

void nlms_update_inplace(std::span<cplx> weights, std::span<const cplx> x_block,
                         cplx e, double mu, double alpha) {
    if (weights.size() != x_block.size())
        throw std::invalid_argument("nlms_update: weight/input length mismatch");
    double energy = 0.0;
    for (const cplx& x : x_block)
        energy += x.real() * x.real() + x.imag() * x.imag();
    const double scale = mu / (alpha + energy);
    const double gr = scale * e.real();
    const double gi = scale * e.imag();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double xr = x_block[i].real();
        const double xi = -x_block[i].imag();  // conjugate of the input block
        weights[i] += cplx{gr * xr - gi * xi, gr * xi + gi * xr};
    }
}

std::vector<cplx> nlms_update(std::span<const cplx> weights,
                              std::span<const cplx> x_block, cplx e, double mu,
                              double alpha) {
    std::vector<cplx> out(weights.begin(), weights.end());
    nlms_update_inplace(out, x_block, e, mu, alpha);
    return out;
}

namespace {

// shared by the pure function and the engine so both produce identical taps
void stack_into(const SubbandWeights& weights, const SafConfig& cfg,
                std::vector<cplx>& band_ffts, std::vector<cplx>& spec,
                std::vector<double>& taps, double* imag_residue) {
    const int N = cfg.fullband_len;
    const int M = cfg.subbands;
    const int Q = cfg.subband_len();
    const int nb = cfg.retained_bands();

    band_ffts.resize(static_cast<std::size_t>(nb) * Q);
    for (int k = 0; k < nb; ++k) {
        const auto& wk = weights.bands[static_cast<std::size_t>(k)];
        const std::span<cplx> slot{band_ffts.data() + static_cast<std::size_t>(k) * Q,
                                   static_cast<std::size_t>(Q)};
        std::copy(wk.begin(), wk.end(), slot.begin());
        dft_inplace(slot);
    }

    spec.assign(N, cplx{0.0, 0.0});
    const int spacing = N / M;  // fullband bins between band centers
    for (int f = 0; f < N / 2; ++f) {
        const int k = (2 * f * M + N) / (2 * N);  // round(f*M/N), exact
        int q = (f - k * spacing) % Q;
        if (q < 0) q += Q;
        spec[f] = band_ffts[static_cast<std::size_t>(k) * Q + q];
    }
    spec[0] = cplx{spec[0].real(), 0.0};
    spec[static_cast<std::size_t>(N) / 2] = cplx{0.0, 0.0};
    for (int f = 1; f < N / 2; ++f)
        spec[static_cast<std::size_t>(N - f)] = std::conj(spec[f]);

    idft_inplace(spec);
    taps.resize(N);
    double max_imag = 0.0;
    for (int i = 0; i < N; ++i) {
        taps[i] = spec[i].real();
        max_imag = std::max(max_imag, std::abs(spec[i].imag()));
    }
    if (imag_residue) *imag_residue = max_imag;
}

}  // namespace

FullbandFilter stack_fullband(const SubbandWeights& weights, const SafConfig& cfg,
                              double& imag_residue) {
    const SafConfig rc = cfg.resolved();
    if (weights.bands.size() != static_cast<std::size_t>(rc.retained_bands()))
        throw std::invalid_argument("stack_fullband: wrong band count");
    for (const auto& b : weights.bands)
        if (b.size() != static_cast<std::size_t>(rc.subband_len()))
            throw std::invalid_argument("stack_fullband: wrong subband filter length");
    std::vector<cplx> band_ffts;
    std::vector<cplx> spec;
    FullbandFilter out;
    stack_into(weights, rc, band_ffts, spec, out.taps, &imag_residue);
    return out;
}

FullbandFilter stack_fullband(const SubbandWeights& weights, const SafConfig& cfg) {
    double residue = 0.0;
    return stack_fullband(weights, cfg, residue);
}

AscEngine::AscEngine(const SafConfig& cfg, const PathModel& secondary_estimate)
    : cfg_(cfg.resolved()),
      s_hat_(secondary_estimate.taps),
      weights_(SubbandWeights::zeros(cfg_)),
      x_line_(std::max<std::size_t>(cfg_.fullband_len, secondary_estimate.taps.size())),
      y_line_(std::max<std::size_t>(1, secondary_estimate.taps.size())),
      bank_x_(cfg_.prototype, cfg_.subbands),
      bank_e_(cfg_.prototype, cfg_.subbands),
      block_buf_(static_cast<std::size_t>(cfg_.retained_bands()) * 2 *
                     cfg_.subband_len(),
                 cplx{0.0, 0.0}),
      block_pos_(static_cast<std::size_t>(cfg_.subband_len()) - 1) {
    if (s_hat_.empty())
        throw std::invalid_argument("AscEngine: secondary path estimate is empty");
    require_finite(s_hat_, "AscEngine: secondary path estimate");
    fullband_.taps.assign(cfg_.fullband_len, 0.0);
}

AscEngine::StepResult AscEngine::step(double x, double d) {
    if (!std::isfinite(x) || !std::isfinite(d))
        throw engine_fault("non-finite input at sample " + std::to_string(n_));

    x_line_.push(x);
    const double y = dot(fullband_.taps, x_line_.window(fullband_.taps.size()));
    y_line_.push(y);
    const double e = d - dot(s_hat_, y_line_.window(s_hat_.size()));
    const double xp = dot(s_hat_, x_line_.window(s_hat_.size()));
    if (!std::isfinite(y) || !std::isfinite(e))
        throw engine_fault("adaptation diverged at sample " + std::to_string(n_));

    ++n_;
    if (gate_) ++gated_;

    const bool frame_ready = bank_x_.push(xp);
    bank_e_.push(e);
    if (frame_ready) {
        // advance the per-band regression blocks, newest first
        const int Q = cfg_.subband_len();
        const int nb = cfg_.retained_bands();
        block_pos_ = (block_pos_ == 0) ? static_cast<std::size_t>(Q) - 1
                                       : block_pos_ - 1;
        const auto& xf = bank_x_.frame();
        for (int k = 0; k < nb; ++k) {
            const std::size_t base = static_cast<std::size_t>(k) * 2 * Q;
            block_buf_[base + block_pos_] = xf[static_cast<std::size_t>(k)];
            block_buf_[base + block_pos_ + Q] = xf[static_cast<std::size_t>(k)];
        }
        if (gate_) update_weights();
    }
    return {y, e};
}

void AscEngine::update_weights() {
    const int Q = cfg_.subband_len();
    const int nb = cfg_.retained_bands();
    const auto& ef = bank_e_.frame();
    for (int k = 0; k < nb; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * 2 * Q + block_pos_;
        nlms_update_inplace(weights_.bands[static_cast<std::size_t>(k)],
                            {block_buf_.data() + base, static_cast<std::size_t>(Q)},
                            ef[static_cast<std::size_t>(k)], cfg_.mu, cfg_.alpha);
    }
    stack_into(weights_, cfg_, band_spec_, full_spec_, fullband_.taps, nullptr);
}

}  // namespace asc
