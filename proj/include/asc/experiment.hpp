#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asc/crnn.hpp"
#include "asc/hangover.hpp"
#include "asc/metrics.hpp"
#include "asc/saf.hpp"
#include "asc/snore_synth.hpp"

namespace asc {

enum class DetectorKind { Oracle, Energy, Crnn };

struct ExperimentConfig {
    // input
    std::string source = "synth";  // "synth" | "wav"
    std::string wav_path;
    std::string annotations_path;  // sidecar for wav input
    double duration_s = 600.0;     // synth input
    SnoreProfile synth;

    // acoustic paths; empty -> seeded synthetic IRs written to the output dir
    std::string p_path;
    std::string s_path;
    int path_length = 256;

    SafConfig saf;
    int prototype_len = 256;

    DetectorKind detector = DetectorKind::Oracle;
    double energy_threshold = -18.0;  // natural-log units
    std::string weights_path;

    bool hangover_enabled = true;
    std::size_t hangover_x = 3;
    std::size_t hangover_k = 100;

    std::vector<double> snr_list_db = {10.0, 15.0, 20.0};
    std::string sad_mode = "both";  // "on" | "off" | "both"
    std::uint64_t seed = 1;
    std::string outdir = "out";
    bool emit_traces = false;
    bool parallel = true;
};

// Accepts .toml or .json (by extension, falling back to content sniffing).
ExperimentConfig load_experiment_config(const std::string& path);

struct TrajectoryPoint {
    double t_s = 0.0;
    double misalignment_db = 0.0;
};

struct RowResult {
    double snr_db = 0.0;
    bool sad_on = false;
    std::string status = "ok";  // "ok" or a fault diagnostic
    double lsd_db = 0.0;
    int lsd_floored_bins = 0;
    double misalignment_db = 0.0;
    double gate_duty = 0.0;
    std::uint64_t noise_seed = 0;
    std::vector<TrajectoryPoint> trajectory;  // sampled once per second
    std::vector<double> final_taps;           // w(n) after the run
};

struct ExperimentResult {
    std::string config_hash;
    std::string config_json;  // canonical resolved config
    std::string snr_reference;  // "active" | "full"
    int sample_rate_hz = 0;
    double duration_s = 0.0;
    double snore_ratio = 0.0;
    std::vector<RowResult> rows;
    // inputs resolved during preparation (exposed for the CLI and tests)
    Signal reference;
    std::vector<SnoreEvent> annotations;
    PathModel primary;
    PathModel secondary;
    std::vector<std::uint8_t> detector_bits;  // raw, before hangover
    std::vector<std::uint8_t> gate_bits;      // after hangover
};

// Validates and loads everything up front (fail fast), then runs the
// (snr x sad_mode) grid.  Deterministic for a fixed config and seed; rows
// may execute in parallel without changing any output.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes results.csv, one trajectory CSV per row, manifest.json, and the
// default IR files when synthetic paths were used.  Creates `outdir`.
void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result);

// Fig-3-style plot data: per 10 ms cell the peak |amplitude|, the raw
// detector bit, and the post-processed bit (streams held at their last
// value when shorter than the grid).
void emit_prediction_trace(const std::string& path, const Signal& signal,
                           const std::vector<std::uint8_t>& raw,
                           const std::vector<std::uint8_t>& post,
                           double hop_ms = 10.0);

// Seeded default IRs: direct spike plus sparse early reflections and an
// exponentially decaying tail, mildly lowpass-smoothed.  The secondary path
// keeps its direct tap at index 0 and a quiet tail so its inverse is tame.
PathModel make_synthetic_primary(int length, std::uint64_t seed);
PathModel make_synthetic_secondary(int length, std::uint64_t seed);

std::string config_to_canonical_json(const ExperimentConfig& cfg);
std::string fnv1a_hex(const std::string& text);

}  // namespace asc
