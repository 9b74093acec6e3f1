#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asc {

using cplx = std::complex<double>;

// Uniformly sampled real-valued waveform, nominal range [-1, 1].
struct Signal {
    std::vector<double> samples;
    int sample_rate_hz = 44100;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

// Finite impulse response (primary/secondary path or an estimate of one).
struct PathModel {
    std::vector<double> taps;

    std::size_t length() const { return taps.size(); }
};

// Raised when the adaptive engine detects non-finite samples or weights.
struct engine_fault : std::runtime_error {
    explicit engine_fault(const std::string& msg) : std::runtime_error(msg) {}
};

// Throws std::invalid_argument naming `what` if any value is NaN/Inf.
void require_finite(const std::vector<double>& v, const char* what);

}  // namespace asc
