#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/saf.hpp"
#include "asc/signal.hpp"

namespace asc {

// DFT-bin window the log-spectral distance is evaluated over.
struct LsdBand {
    int k1 = 0;
    int k2 = 0;
    int fft_size = 4096;
    int sample_rate_hz = 44100;

    // k1 = ceil(lo_hz*K/fs), k2 = floor(hi_hz*K/fs);  defaults 100 Hz - 20 kHz
    static LsdBand from_hz(double lo_hz = 100.0, double hi_hz = 20000.0,
                           int fft_size = 4096, int sample_rate_hz = 44100);
};

struct LsdResult {
    double db = 0.0;
    int floored_bins = 0;  // bins where a magnitude hit the 1e-12 floor
};

// RMS over the band of 10*log10(|P|^2/|W|^2), both from zero-padded
// fft_size-point transforms.  Magnitudes below 1e-12 are floored and counted.
LsdResult lsd(const PathModel& p, const FullbandFilter& w, const LsdBand& band);

// 20*log10(||p - w|| / ||p||) over max(len(p), len(w)) zero-padded taps.
// Returns -infinity when w equals p exactly; throws when ||p|| is zero.
double misalignment(const PathModel& p, const FullbandFilter& w);

// "< -300 dB" for -inf or anything at or below -300, fixed decimals otherwise.
std::string format_db(double db);

struct MixResult {
    Signal mixed;
    double noise_gain = 0.0;
};

// out = clean + g*noise with g set so the clean/noise power ratio over the
// active samples equals snr_db.  `active` empty means the whole signal.
MixResult mix_at_snr(const Signal& clean, const Signal& noise, double snr_db,
                     const std::vector<std::uint8_t>& active = {});

}  // namespace asc
