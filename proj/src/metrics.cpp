#include "asc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "asc/fft.hpp"

namespace asc {

namespace {

constexpr double kMagFloor = 1e-12;

std::vector<double> magnitude_spectrum(const std::vector<double>& taps, int K,
                                       int* floored) {
    std::vector<cplx> buf(static_cast<std::size_t>(K), cplx{0.0, 0.0});
    const std::size_t n = std::min<std::size_t>(taps.size(), buf.size());
    for (std::size_t i = 0; i < n; ++i) buf[i] = taps[i];
    dft_inplace(buf);
    std::vector<double> mag(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        mag[i] = std::abs(buf[i]);
        if (mag[i] < kMagFloor) {
            mag[i] = kMagFloor;
            if (floored) ++*floored;
        }
    }
    return mag;
}

}  // namespace

LsdBand LsdBand::from_hz(double lo_hz, double hi_hz, int fft_size,
                         int sample_rate_hz) {
    LsdBand b;
    b.fft_size = fft_size;
    b.sample_rate_hz = sample_rate_hz;
    b.k1 = static_cast<int>(std::ceil(lo_hz * fft_size / sample_rate_hz));
    b.k2 = static_cast<int>(std::floor(hi_hz * fft_size / sample_rate_hz));
    return b;
}

LsdResult lsd(const PathModel& p, const FullbandFilter& w, const LsdBand& band) {
    if (band.k1 < 0 || band.k2 < band.k1 || band.k2 >= band.fft_size)
        throw std::invalid_argument("lsd: invalid band");
    if (!is_pow2(static_cast<std::size_t>(band.fft_size)))
        throw std::invalid_argument("lsd: fft_size must be a power of two");
    LsdResult out;
    const auto P = magnitude_spectrum(p.taps, band.fft_size, &out.floored_bins);
    const auto W = magnitude_spectrum(w.taps, band.fft_size, &out.floored_bins);
    double acc = 0.0;
    for (int k = band.k1; k <= band.k2; ++k) {
        const double term = 20.0 * std::log10(P[static_cast<std::size_t>(k)] /
                                              W[static_cast<std::size_t>(k)]);
        acc += term * term;
    }
    out.db = std::sqrt(acc / (band.k2 - band.k1 + 1));
    return out;
}

double misalignment(const PathModel& p, const FullbandFilter& w) {
    const std::size_t len = std::max(p.taps.size(), w.taps.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double pi = i < p.taps.size() ? p.taps[i] : 0.0;
        const double wi = i < w.taps.size() ? w.taps[i] : 0.0;
        num += (pi - wi) * (pi - wi);
        den += pi * pi;
    }
    if (den == 0.0) throw std::invalid_argument("misalignment: ||p|| is zero");
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
}

std::string format_db(double db) {
    if (std::isinf(db) || db <= -300.0) return "< -300 dB";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f dB", db);
    return buf;
}

MixResult mix_at_snr(const Signal& clean, const Signal& noise, double snr_db,
                     const std::vector<std::uint8_t>& active) {
    if (clean.samples.size() != noise.samples.size())
        throw std::invalid_argument("mix_at_snr: length mismatch");
    if (!active.empty() && active.size() != clean.samples.size())
        throw std::invalid_argument("mix_at_snr: active mask length mismatch");

    double p_clean = 0.0, p_noise = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        if (!active.empty() && !active[i]) continue;
        p_clean += clean.samples[i] * clean.samples[i];
        p_noise += noise.samples[i] * noise.samples[i];
        ++count;
    }
    if (count == 0 || p_clean == 0.0)
        throw std::invalid_argument("mix_at_snr: zero clean power on active region");
    if (p_noise == 0.0)
        throw std::invalid_argument("mix_at_snr: zero noise power on active region");
    p_clean /= static_cast<double>(count);
    p_noise /= static_cast<double>(count);

    MixResult out;
    out.noise_gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
    out.mixed.sample_rate_hz = clean.sample_rate_hz;
    out.mixed.samples.resize(clean.samples.size());
    for (std::size_t i = 0; i < clean.samples.size(); ++i)
        out.mixed.samples[i] = clean.samples[i] + out.noise_gain * noise.samples[i];
    return out;
}

}  // namespace asc
