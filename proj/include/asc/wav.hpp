#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/signal.hpp"

namespace asc {

struct WavData {
    std::vector<std::vector<double>> channels;
    int sample_rate_hz = 0;
};

// 16-bit PCM or 32-bit float WAV, any channel count.
WavData read_wav(const std::string& path);

// 16-bit PCM, values clipped to [-1, 1].
void write_wav_pcm16(const std::string& path,
                     const std::vector<std::vector<double>>& channels,
                     int sample_rate_hz);
void write_wav_pcm16(const std::string& path, const Signal& mono);

// 32-bit float WAV (format 3), used for impulse responses.
void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       int sample_rate_hz);

// Impulse response from .wav (first channel) or raw little-endian float32
// when the name ends in .f32.
std::vector<double> read_ir(const std::string& path);
void write_ir_f32(const std::string& path, const std::vector<double>& taps);

// Prediction streams: one '0'/'1' character per line, or bit-packed binary
// (u64 little-endian count, then LSB-first packed bytes) for .bits files.
std::vector<std::uint8_t> read_prediction_stream(const std::string& path);
void write_prediction_stream(const std::string& path,
                             const std::vector<std::uint8_t>& bits);

}  // namespace asc
