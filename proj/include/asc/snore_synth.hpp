#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/signal.hpp"

namespace asc {

struct SnoreEvent {
    double start_s = 0.0;
    double end_s = 0.0;
};

// Generator constants for the synthetic snore corpus.  Events are harmonic
// stacks (1/h amplitude decay) with an inspiration phase in the lower
// fundamental band and an expiration phase in the upper band, plus turbulent
// breath noise; gaps carry a low ambient floor so the reference microphone is
// never digitally silent.
struct SnoreProfile {
    double inspiration_low_hz = 100.0;
    double inspiration_high_hz = 200.0;
    double expiration_low_hz = 200.0;
    double expiration_high_hz = 300.0;
    int harmonics = 12;
    double event_min_s = 2.0;
    double event_max_s = 5.0;
    double snore_ratio = 0.128;
    double event_amplitude = 0.3;
    double attack_s = 0.04;          // raised-cosine edges of each phase
    double breath_noise_db = -8.0;   // breath noise level relative to event RMS
    double breath_pole = 0.5;        // one-pole lowpass coefficient for breath noise
    double background_db = -25.0;    // ambient floor relative to event amplitude
    std::uint64_t seed = 1;
};

struct SnoreSignal {
    Signal signal;
    std::vector<SnoreEvent> annotations;
};

// Deterministic given (profile, duration, fs).  Achieved snore ratio lands
// within +-2 percentage points of the target for durations >= 600 s.
SnoreSignal generate_snore(const SnoreProfile& profile, double duration_s, int fs);

// Frame i (10 ms grid by default) is 1 iff its center falls inside an event.
// Intervals must be sorted and non-overlapping.
std::vector<std::uint8_t> annotations_to_frames(const std::vector<SnoreEvent>& events,
                                                double hop_ms, std::size_t frames);

// Per-sample activity mask from the annotations.
std::vector<std::uint8_t> annotations_to_samples(const std::vector<SnoreEvent>& events,
                                                 int sample_rate_hz,
                                                 std::size_t total_samples);

// Sidecar annotation CSV: one "start_s,end_s" line per event.
void save_annotations_csv(const std::string& path,
                          const std::vector<SnoreEvent>& events);
std::vector<SnoreEvent> load_annotations_csv(const std::string& path);

}  // namespace asc
