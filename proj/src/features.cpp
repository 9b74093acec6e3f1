#include "asc/features.hpp"

#include <algorithm>
#include <cmath>

#include "asc/fft.hpp"

namespace asc {

namespace {

constexpr double kPi = 3.141592653589793238462643;

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (hz < min_log_hz) return hz / f_sp;
    return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (mel < min_log_mel) return mel * f_sp;
    return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

Signal to_mono(const Signal& left, const Signal& right) {
    if (left.samples.size() != right.samples.size())
        throw std::invalid_argument("to_mono: channel length mismatch");
    Signal out;
    out.sample_rate_hz = left.sample_rate_hz;
    out.samples.resize(left.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = 0.5 * (left.samples[i] + right.samples[i]);
    return out;
}

std::size_t logmel_frame_count(std::size_t num_samples, int sample_rate_hz,
                               const LogmelParams& params) {
    const auto win = static_cast<std::size_t>(
        std::lround(params.win_ms * sample_rate_hz / 1000.0));
    const auto hop = static_cast<std::size_t>(
        std::lround(params.hop_ms * sample_rate_hz / 1000.0));
    if (num_samples < win || win == 0 || hop == 0) return 0;
    return (num_samples - win) / hop + 1;
}

MelFeatureMatrix logmel(const Signal& mono, const LogmelParams& params) {
    const int fs = mono.sample_rate_hz;
    const auto win = static_cast<std::size_t>(std::lround(params.win_ms * fs / 1000.0));
    const auto hop = static_cast<std::size_t>(std::lround(params.hop_ms * fs / 1000.0));
    if (fs <= 0 || win == 0 || hop == 0)
        throw std::invalid_argument("logmel: invalid framing parameters");

    MelFeatureMatrix out;
    out.n_mels = params.n_mels;
    out.win_ms = params.win_ms;
    out.hop_ms = params.hop_ms;
    out.frames = logmel_frame_count(mono.samples.size(), fs, params);
    out.data.assign(out.frames * static_cast<std::size_t>(params.n_mels), 0.0);
    if (out.frames == 0) return out;

    const std::size_t nfft = next_pow2(win);
    const std::size_t nbins = nfft / 2 + 1;

    std::vector<double> hann(win);
    for (std::size_t i = 0; i < win; ++i)
        hann[i] = win == 1 ? 1.0 : 0.5 * (1.0 - std::cos(2.0 * kPi * i / (win - 1)));

    // triangular Mel bank over FFT bin frequencies, Slaney area-normalized
    const int nm = params.n_mels;
    std::vector<double> edges(nm + 2);
    const double mel_max = hz_to_mel(fs / 2.0);
    for (int i = 0; i < nm + 2; ++i)
        edges[i] = mel_to_hz(mel_max * i / (nm + 1));
    std::vector<std::vector<double>> bank(nm, std::vector<double>(nbins, 0.0));
    for (int m = 0; m < nm; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        const double norm = 2.0 / (hi - lo);
        for (std::size_t k = 0; k < nbins; ++k) {
            const double f = static_cast<double>(k) * fs / static_cast<double>(nfft);
            double w = 0.0;
            if (f > lo && f < hi)
                w = (f <= mid) ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            bank[m][k] = w * norm;
        }
    }

    std::vector<cplx> buf(nfft);
    std::vector<double> power(nbins);
    for (std::size_t t = 0; t < out.frames; ++t) {
        const double* seg = mono.samples.data() + t * hop;
        for (std::size_t i = 0; i < nfft; ++i)
            buf[i] = (i < win) ? cplx{seg[i] * hann[i], 0.0} : cplx{0.0, 0.0};
        dft_inplace(buf);
        for (std::size_t k = 0; k < nbins; ++k) power[k] = std::norm(buf[k]);
        for (int m = 0; m < nm; ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k < nbins; ++k) acc += bank[m][k] * power[k];
            out.data[t * static_cast<std::size_t>(nm) + m] =
                std::log(acc + params.log_floor);
        }
    }
    return out;
}

std::vector<std::uint8_t> binarize(const std::vector<double>& probabilities) {
    std::vector<std::uint8_t> out(probabilities.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = probabilities[i] > 0.5 ? 1 : 0;
    return out;
}

std::vector<std::uint8_t> energy_detector(const MelFeatureMatrix& features,
                                          double threshold) {
    std::vector<std::uint8_t> out(features.frames);
    for (std::size_t t = 0; t < features.frames; ++t) {
        double mean = 0.0;
        for (int m = 0; m < features.n_mels; ++m) mean += features.at(t, m);
        mean /= features.n_mels;
        out[t] = mean > threshold ? 1 : 0;
    }
    return out;
}

}  // namespace asc
