#include "asc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "asc/features.hpp"
#include "asc/fir.hpp"
#include "asc/rng.hpp"
#include "asc/wav.hpp"

namespace asc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSampleRate = 44100;
constexpr double kHopMs = 10.0;

// fixed seed streams derived from the master seed
constexpr std::uint64_t kSynthStream = 1000;
constexpr std::uint64_t kPrimaryStream = 2000;
constexpr std::uint64_t kSecondaryStream = 2001;
constexpr std::uint64_t kNoiseStreamBase = 100;

std::string fmt(double v, const char* spec = "%.6f") {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string mode_name(bool sad_on) { return sad_on ? "on" : "off"; }

std::vector<double> smooth3(const std::vector<double>& v) {
    // centered [0.25 0.5 0.25]; zero at Nyquist so the stacked filter can
    // represent the result exactly
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double acc = 0.5 * v[i];
        if (i > 0) acc += 0.25 * v[i - 1];
        if (i + 1 < v.size()) acc += 0.25 * v[i + 1];
        out[i] = acc;
    }
    return out;
}

void normalize(std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) e += x * x;
    const double n = std::sqrt(e);
    if (n > 0.0)
        for (double& x : v) x /= n;
}

}  // namespace

PathModel make_synthetic_primary(int length, std::uint64_t seed) {
    if (length < 32) throw std::invalid_argument("primary path length too short");
    Rng rng(seed);
    std::vector<double> taps(static_cast<std::size_t>(length), 0.0);
    const int direct = 16;
    taps[direct] = 1.0;
    for (int r = 0; r < 5; ++r) {
        const auto idx = static_cast<std::size_t>(rng.uniform_int(direct + 4, length / 3));
        taps[idx] += rng.uniform(0.2, 0.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    for (int i = direct + 1; i < length; ++i)
        taps[static_cast<std::size_t>(i)] +=
            0.15 * rng.normal() * std::exp(-(i - direct) / 40.0);
    taps = smooth3(taps);
    normalize(taps);
    return {taps};
}

PathModel make_synthetic_secondary(int length, std::uint64_t seed) {
    if (length < 8) throw std::invalid_argument("secondary path length too short");
    Rng rng(seed);
    std::vector<double> taps(static_cast<std::size_t>(length), 0.0);
    std::vector<double> tail(taps.size(), 0.0);
    for (int i = 1; i < length; ++i)
        tail[static_cast<std::size_t>(i)] = 0.05 * rng.normal() * std::exp(-i / 10.0);
    tail = smooth3(tail);
    taps[0] = 1.0;  // direct response at zero delay keeps the inverse causal
    for (std::size_t i = 1; i < taps.size(); ++i) taps[i] = tail[i];
    normalize(taps);
    return {taps};
}

namespace {

struct Prepared {
    Signal x;
    std::vector<SnoreEvent> annotations;
    PathModel p, s;
    bool p_synthetic = false, s_synthetic = false;
    std::vector<std::uint8_t> raw_bits;
    std::vector<std::uint8_t> gate_bits;   // frame grid, after hangover
    std::vector<std::uint8_t> gate;        // per sample
    std::vector<std::uint8_t> active;      // per sample, empty = whole signal
    Signal d_clean;
};

Prepared prepare(const ExperimentConfig& cfg, SafConfig& saf) {
    if (cfg.source != "synth" && cfg.source != "wav")
        throw std::invalid_argument("config: input.source must be 'synth' or 'wav'");
    if (cfg.sad_mode != "on" && cfg.sad_mode != "off" && cfg.sad_mode != "both")
        throw std::invalid_argument("config: experiment.sad_mode must be on, off, or both");
    if (cfg.snr_list_db.empty())
        throw std::invalid_argument("config: experiment.snr_db must not be empty");

    saf = cfg.saf;
    saf.prototype = design_prototype(cfg.prototype_len, saf.subbands);
    saf.validate();

    HangoverParams hp{1, cfg.hangover_k, cfg.hangover_x};
    if (cfg.hangover_enabled) hp.validate();

    Prepared prep;
    if (cfg.source == "synth") {
        SnoreProfile profile = cfg.synth;
        profile.seed = Rng::derive_seed(cfg.seed, kSynthStream);
        auto synth = generate_snore(profile, cfg.duration_s, kSampleRate);
        prep.x = std::move(synth.signal);
        prep.annotations = std::move(synth.annotations);
    } else {
        const WavData wav = read_wav(cfg.wav_path);
        if (wav.channels.empty()) throw std::runtime_error("empty wav: " + cfg.wav_path);
        Signal mono;
        mono.sample_rate_hz = wav.sample_rate_hz;
        if (wav.channels.size() == 1) {
            mono.samples = wav.channels[0];
        } else {
            Signal l{wav.channels[0], wav.sample_rate_hz};
            Signal r{wav.channels[1], wav.sample_rate_hz};
            mono = to_mono(l, r);
        }
        prep.x = std::move(mono);
        if (!cfg.annotations_path.empty())
            prep.annotations = load_annotations_csv(cfg.annotations_path);
    }

    if (cfg.detector == DetectorKind::Oracle && prep.annotations.empty())
        throw std::invalid_argument(
            "config: the oracle detector needs annotations (synth input or input.annotations)");

    const std::size_t total = prep.x.samples.size();
    const int fs = prep.x.sample_rate_hz;
    const auto hop =
        static_cast<std::size_t>(std::lround(kHopMs * fs / 1000.0));

    prep.p = cfg.p_path.empty()
                 ? make_synthetic_primary(cfg.path_length,
                                          Rng::derive_seed(cfg.seed, kPrimaryStream))
                 : PathModel{read_ir(cfg.p_path)};
    prep.p_synthetic = cfg.p_path.empty();
    prep.s = cfg.s_path.empty()
                 ? make_synthetic_secondary(cfg.path_length,
                                            Rng::derive_seed(cfg.seed, kSecondaryStream))
                 : PathModel{read_ir(cfg.s_path)};
    prep.s_synthetic = cfg.s_path.empty();
    if (prep.p.taps.empty() || prep.s.taps.empty())
        throw std::runtime_error("config: empty impulse response");

    // detector -> raw frame bits
    switch (cfg.detector) {
        case DetectorKind::Oracle: {
            const std::size_t frames = (total + hop - 1) / hop;
            prep.raw_bits = annotations_to_frames(prep.annotations, kHopMs, frames);
            break;
        }
        case DetectorKind::Energy: {
            const auto feats = logmel(prep.x);
            prep.raw_bits = energy_detector(feats, cfg.energy_threshold);
            break;
        }
        case DetectorKind::Crnn: {
            const CrnnWeights weights = load_weights(cfg.weights_path);
            weights.validate();
            const auto feats = logmel(prep.x);
            prep.raw_bits = binarize(crnn_forward(feats, weights));
            break;
        }
    }

    if (cfg.hangover_enabled && !prep.raw_bits.empty()) {
        hp.L = prep.raw_bits.size();
        prep.gate_bits = hangover(prep.raw_bits, hp);
    } else {
        prep.gate_bits = prep.raw_bits;
    }
    prep.gate = gate_stream(prep.gate_bits, fs, kHopMs, total);

    if (!prep.annotations.empty())
        prep.active = annotations_to_samples(prep.annotations, fs, total);

    prep.d_clean = fir_filter(prep.x, prep.p);
    return prep;
}

RowResult run_row(const ExperimentConfig& cfg, const SafConfig& saf,
                  const Prepared& prep, double snr_db, std::size_t snr_index,
                  bool sad_on) {
    RowResult row;
    row.snr_db = snr_db;
    row.sad_on = sad_on;
    row.noise_seed = Rng::derive_seed(cfg.seed, kNoiseStreamBase + snr_index);

    const auto& x = prep.x.samples;
    const int fs = prep.x.sample_rate_hz;
    try {
        Signal noise;
        noise.sample_rate_hz = fs;
        noise.samples.resize(x.size());
        Rng rng(row.noise_seed);
        for (auto& v : noise.samples) v = rng.normal();
        const Signal d = mix_at_snr(prep.d_clean, noise, snr_db, prep.active).mixed;

        AscEngine engine(saf, prep.s);
        const auto sample_every = static_cast<std::size_t>(fs);
        for (std::size_t n = 0; n < x.size(); ++n) {
            engine.set_gate(sad_on ? prep.gate[n] != 0 : true);
            engine.step(x[n], d.samples[n]);
            if ((n + 1) % sample_every == 0)
                row.trajectory.push_back(
                    {static_cast<double>(n + 1) / fs,
                     misalignment(prep.p, engine.fullband())});
        }
        const auto band = LsdBand::from_hz(100.0, 20000.0, 4096, fs);
        const LsdResult l = lsd(prep.p, engine.fullband(), band);
        row.lsd_db = l.db;
        row.lsd_floored_bins = l.floored_bins;
        row.misalignment_db = misalignment(prep.p, engine.fullband());
        row.gate_duty = engine.gate_duty();
        row.final_taps = engine.fullband().taps;
    } catch (const engine_fault& e) {
        row.status = std::string("fault: ") + e.what();
        row.lsd_db = std::nan("");
        row.misalignment_db = std::nan("");
    }
    return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    SafConfig saf;
    Prepared prep = prepare(cfg, saf);

    ExperimentResult result;
    result.config_json = config_to_canonical_json(cfg);
    // the hash identifies the experiment, not where or how it is written
    json semantic = json::parse(result.config_json);
    semantic["experiment"].erase("outdir");
    semantic["experiment"].erase("emit_traces");
    semantic["experiment"].erase("parallel");
    result.config_hash = fnv1a_hex(semantic.dump());
    result.snr_reference = prep.active.empty() ? "full" : "active";
    result.sample_rate_hz = prep.x.sample_rate_hz;
    result.duration_s = prep.x.duration_s();
    double active_time = 0.0;
    for (const auto& e : prep.annotations) active_time += e.end_s - e.start_s;
    result.snore_ratio =
        result.duration_s > 0.0 ? active_time / result.duration_s : 0.0;

    std::vector<bool> modes;
    if (cfg.sad_mode == "both")
        modes = {false, true};
    else
        modes = {cfg.sad_mode == "on"};

    struct RowSpec {
        double snr;
        std::size_t snr_index;
        bool sad_on;
    };
    std::vector<RowSpec> specs;
    for (std::size_t si = 0; si < cfg.snr_list_db.size(); ++si)
        for (bool on : modes) specs.push_back({cfg.snr_list_db[si], si, on});

    result.rows.resize(specs.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    // each in-flight row owns a noise buffer of the signal length, so cap
    // the worker count rather than spawning one task per row
    const unsigned workers =
        cfg.parallel ? std::min<unsigned>({hw, 4u, static_cast<unsigned>(specs.size())})
                     : 1u;
    if (workers > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= specs.size()) return;
                    result.rows[i] = run_row(cfg, saf, prep, specs[i].snr,
                                             specs[i].snr_index, specs[i].sad_on);
                }
            });
        for (auto& t : pool) t.join();
    } else {
        for (std::size_t i = 0; i < specs.size(); ++i)
            result.rows[i] = run_row(cfg, saf, prep, specs[i].snr,
                                     specs[i].snr_index, specs[i].sad_on);
    }

    result.reference = std::move(prep.x);
    result.annotations = std::move(prep.annotations);
    result.primary = std::move(prep.p);
    result.secondary = std::move(prep.s);
    result.detector_bits = std::move(prep.raw_bits);
    result.gate_bits = std::move(prep.gate_bits);
    return result;
}

namespace {

std::string trajectory_filename(const RowResult& row) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "trajectory_snr%g_%s.csv", row.snr_db,
                  mode_name(row.sad_on).c_str());
    return buf;
}

}  // namespace

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result) {
    const fs::path out(cfg.outdir);
    fs::create_directories(out);

    {
        std::ofstream os(out / "results.csv", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write results.csv");
        os << "snr_db,sad_mode,status,lsd_db,lsd_floored_bins,misalignment_db,"
              "gate_duty,noise_seed,trajectory_file,config_hash\r\n";
        for (const auto& row : result.rows) {
            os << fmt(row.snr_db, "%.2f") << ',' << mode_name(row.sad_on) << ','
               << row.status << ',' << fmt(row.lsd_db) << ','
               << row.lsd_floored_bins << ',' << fmt(row.misalignment_db) << ','
               << fmt(row.gate_duty) << ',' << row.noise_seed << ','
               << trajectory_filename(row) << ',' << result.config_hash << "\r\n";
        }
    }

    for (const auto& row : result.rows) {
        std::ofstream os(out / trajectory_filename(row), std::ios::binary);
        if (!os) throw std::runtime_error("cannot write trajectory file");
        os << "t_s,misalignment_db\r\n";
        for (const auto& pt : row.trajectory)
            os << fmt(pt.t_s, "%.2f") << ',' << fmt(pt.misalignment_db) << "\r\n";
        if (!row.final_taps.empty()) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "w_snr%g_%s.f32", row.snr_db,
                          mode_name(row.sad_on).c_str());
            write_ir_f32((out / buf).string(), row.final_taps);
        }
    }

    if (!result.primary.taps.empty() && cfg.p_path.empty())
        write_ir_f32((out / "p.f32").string(), result.primary.taps);
    if (!result.secondary.taps.empty() && cfg.s_path.empty())
        write_ir_f32((out / "s.f32").string(), result.secondary.taps);

    if (cfg.emit_traces)
        emit_prediction_trace((out / "trace.csv").string(), result.reference,
                              result.detector_bits, result.gate_bits);

    json manifest;
    manifest["tool"] = "snorecancel";
    manifest["format_version"] = 1;
    manifest["config"] = json::parse(result.config_json);
    manifest["config_hash"] = result.config_hash;
    manifest["snr_reference"] = result.snr_reference;
    manifest["sample_rate_hz"] = result.sample_rate_hz;
    manifest["duration_s"] = result.duration_s;
    manifest["snore_ratio"] = result.snore_ratio;
    manifest["lsd_uses_full_filter_length"] = true;
    json rows = json::array();
    for (const auto& row : result.rows) {
        rows.push_back({{"snr_db", row.snr_db},
                        {"sad_mode", mode_name(row.sad_on)},
                        {"status", row.status},
                        {"noise_seed", row.noise_seed},
                        {"trajectory_file", trajectory_filename(row)}});
    }
    manifest["rows"] = rows;
    std::ofstream os(out / "manifest.json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write manifest.json");
    os << manifest.dump(2) << "\n";
}

void emit_prediction_trace(const std::string& path, const Signal& signal,
                           const std::vector<std::uint8_t>& raw,
                           const std::vector<std::uint8_t>& post, double hop_ms) {
    const auto hop = static_cast<std::size_t>(
        std::lround(hop_ms * signal.sample_rate_hz / 1000.0));
    if (hop == 0) throw std::invalid_argument("emit_prediction_trace: bad hop");
    const std::size_t cells = signal.samples.size() / hop;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write trace file: " + path);
    os << "time_s,amplitude,raw_pred,post_pred\r\n";
    for (std::size_t i = 0; i < cells; ++i) {
        double peak = 0.0;
        for (std::size_t n = i * hop; n < (i + 1) * hop; ++n)
            peak = std::max(peak, std::abs(signal.samples[n]));
        const auto hold = [](const std::vector<std::uint8_t>& v, std::size_t i) {
            if (v.empty()) return 0;
            return static_cast<int>(v[std::min(i, v.size() - 1)]);
        };
        os << fmt(static_cast<double>(i) * hop_ms / 1000.0, "%.3f") << ','
           << fmt(peak) << ',' << hold(raw, i) << ',' << hold(post, i) << "\r\n";
    }
    if (!os) throw std::runtime_error("short write: " + path);
}

}  // namespace asc
