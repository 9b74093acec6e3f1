#pragma once

#include <vector>

#include "asc/signal.hpp"

namespace asc {

// Frame grid of log-Mel energies: `frames` rows of `n_mels` coefficients.
struct MelFeatureMatrix {
    std::vector<double> data;  // row-major, frames x n_mels
    std::size_t frames = 0;
    int n_mels = 40;
    double win_ms = 30.0;
    double hop_ms = 10.0;

    double at(std::size_t frame, int mel) const {
        return data[frame * static_cast<std::size_t>(n_mels) + mel];
    }
};

struct LogmelParams {
    int n_mels = 40;
    double win_ms = 30.0;
    double hop_ms = 10.0;
    double log_floor = 1e-10;
};

// Channel averaging; channels must have equal length.
Signal to_mono(const Signal& left, const Signal& right);

// Hann-windowed magnitude-squared spectra through a Slaney-spaced triangular
// Mel bank (0 Hz .. Nyquist), natural log with an additive floor.  A signal
// shorter than one window yields an empty matrix.
MelFeatureMatrix logmel(const Signal& mono, const LogmelParams& params = {});

// Frame count the extractor produces for a given signal length.
std::size_t logmel_frame_count(std::size_t num_samples, int sample_rate_hz,
                               const LogmelParams& params = {});

// Strict threshold at 0.5: probability > 0.5 -> 1, else 0.
std::vector<std::uint8_t> binarize(const std::vector<double>& probabilities);

// Weight-free fallback: frame -> 1 iff the mean of its log-Mel coefficients
// exceeds threshold (natural-log units).
std::vector<std::uint8_t> energy_detector(const MelFeatureMatrix& features,
                                          double threshold);

}  // namespace asc
