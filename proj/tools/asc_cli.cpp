// Command-line front end: corpus synthesis, detection, hangover
// post-processing, single cancellation runs, experiment sweeps, and IR
// metric comparison.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "asc/experiment.hpp"
#include "asc/features.hpp"
#include "asc/fir.hpp"
#include "asc/hangover.hpp"
#include "asc/metrics.hpp"
#include "asc/rng.hpp"
#include "asc/saf.hpp"
#include "asc/snore_synth.hpp"
#include "asc/wav.hpp"

namespace fs = std::filesystem;

namespace {

// errors that should exit with the usage code (2) rather than 1
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw usage_error(std::string(what) + " not found: " + path);
}

asc::Signal load_mono(const std::string& path) {
    const asc::WavData wav = asc::read_wav(path);
    if (wav.channels.empty()) throw usage_error("empty wav: " + path);
    asc::Signal mono;
    mono.sample_rate_hz = wav.sample_rate_hz;
    if (wav.channels.size() == 1) {
        mono.samples = wav.channels[0];
        return mono;
    }
    return asc::to_mono({wav.channels[0], wav.sample_rate_hz},
                        {wav.channels[1], wav.sample_rate_hz});
}

int cmd_synth(const std::string& outdir, double duration, std::uint64_t seed,
              int fs, double ratio, double amplitude) {
    asc::SnoreProfile profile;
    profile.seed = seed;
    profile.snore_ratio = ratio;
    profile.event_amplitude = amplitude;
    const auto synth = asc::generate_snore(profile, duration, fs);
    fs::create_directories(outdir);
    const auto wav_path = (fs::path(outdir) / "snore.wav").string();
    const auto ann_path = (fs::path(outdir) / "snore.csv").string();
    asc::write_wav_pcm16(wav_path, synth.signal);
    asc::save_annotations_csv(ann_path, synth.annotations);
    std::printf("wrote %s (%.1f s, %zu events, ratio %.3f)\n", wav_path.c_str(),
                duration, synth.annotations.size(),
                [&] {
                    double t = 0.0;
                    for (const auto& e : synth.annotations) t += e.end_s - e.start_s;
                    return t / duration;
                }());
    std::printf("wrote %s\n", ann_path.c_str());
    return 0;
}

int cmd_detect(const std::string& in, const std::string& detector,
               double threshold, const std::string& weights,
               const std::string& annotations, const std::string& out,
               const std::string& probs_out) {
    require_file(in, "input wav");
    const asc::Signal mono = load_mono(in);
    std::vector<std::uint8_t> bits;
    std::vector<double> probs;
    if (detector == "energy") {
        bits = asc::energy_detector(asc::logmel(mono), threshold);
    } else if (detector == "crnn") {
        if (weights.empty()) throw usage_error("--weights is required for --detector crnn");
        require_file(weights, "weights file");
        const auto w = asc::load_weights(weights);
        probs = asc::crnn_forward(asc::logmel(mono), w);
        bits = asc::binarize(probs);
    } else if (detector == "oracle") {
        if (annotations.empty())
            throw usage_error("--annotations is required for --detector oracle");
        require_file(annotations, "annotation file");
        const auto ann = asc::load_annotations_csv(annotations);
        const auto frames =
            asc::logmel_frame_count(mono.samples.size(), mono.sample_rate_hz);
        bits = asc::annotations_to_frames(ann, 10.0, frames);
    } else {
        throw usage_error("unknown detector: " + detector);
    }
    asc::write_prediction_stream(out, bits);
    std::printf("wrote %s (%zu frames)\n", out.c_str(), bits.size());
    if (!probs_out.empty()) {
        std::ofstream os(probs_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + probs_out);
        os << "frame,probability\r\n";
        for (std::size_t i = 0; i < probs.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%zu,%.6f\r\n", i, probs[i]);
            os << buf;
        }
        std::printf("wrote %s\n", probs_out.c_str());
    }
    return 0;
}

int cmd_hangover(const std::string& in, const std::string& out, std::size_t x,
                 std::size_t k, const std::string& wav,
                 const std::string& trace) {
    require_file(in, "prediction stream");
    const auto bits = asc::read_prediction_stream(in);
    asc::HangoverParams params{bits.size(), k, x};
    const auto post = asc::hangover(bits, params);
    asc::write_prediction_stream(out, post);
    std::printf("wrote %s (%zu frames)\n", out.c_str(), post.size());
    if (!trace.empty()) {
        if (wav.empty()) throw usage_error("--trace needs --wav for the amplitude column");
        require_file(wav, "wav file");
        asc::emit_prediction_trace(trace, load_mono(wav), bits, post);
        std::printf("wrote %s\n", trace.c_str());
    }
    return 0;
}

int cmd_cancel(const std::string& config_path, double snr, const std::string& sad,
               const std::string& outdir, std::uint64_t seed, bool have_seed) {
    asc::ExperimentConfig cfg;
    if (!config_path.empty()) {
        require_file(config_path, "config file");
        cfg = asc::load_experiment_config(config_path);
    }
    if (have_seed) cfg.seed = seed;
    cfg.snr_list_db = {snr};
    cfg.sad_mode = sad;
    cfg.outdir = outdir;
    const auto result = asc::run_experiment(cfg);
    asc::write_experiment_outputs(cfg, result);
    const auto& row = result.rows.at(0);
    if (!row.final_taps.empty()) {
        const auto w_path = (fs::path(outdir) / "w_est.f32").string();
        asc::write_ir_f32(w_path, row.final_taps);
        std::printf("wrote %s\n", w_path.c_str());
    }
    std::printf("snr %.2f dB, sad %s: lsd %s, misalignment %s, gate duty %.3f\n",
                row.snr_db, row.sad_on ? "on" : "off",
                asc::format_db(row.lsd_db).c_str(),
                asc::format_db(row.misalignment_db).c_str(), row.gate_duty);
    return row.status == "ok" ? 0 : 1;
}

int cmd_experiment(const std::string& config_path, std::uint64_t seed,
                   bool have_seed, const std::string& outdir,
                   const std::vector<double>& snrs, const std::string& sad_mode,
                   double duration, bool have_duration, bool no_parallel,
                   bool traces) {
    asc::ExperimentConfig cfg;
    if (!config_path.empty()) {
        require_file(config_path, "config file");
        cfg = asc::load_experiment_config(config_path);
    }
    if (have_seed) cfg.seed = seed;
    if (!outdir.empty()) cfg.outdir = outdir;
    if (!snrs.empty()) cfg.snr_list_db = snrs;
    if (!sad_mode.empty()) cfg.sad_mode = sad_mode;
    if (have_duration) cfg.duration_s = duration;
    if (no_parallel) cfg.parallel = false;
    if (traces) cfg.emit_traces = true;

    const auto result = asc::run_experiment(cfg);
    asc::write_experiment_outputs(cfg, result);
    std::printf("config %s -> %s (%zu rows)\n", result.config_hash.c_str(),
                cfg.outdir.c_str(), result.rows.size());
    bool all_ok = true;
    for (const auto& row : result.rows) {
        std::printf("  snr %5.1f  sad %-3s  lsd %s  misalignment %s  duty %.3f  %s\n",
                    row.snr_db, row.sad_on ? "on" : "off",
                    asc::format_db(row.lsd_db).c_str(),
                    asc::format_db(row.misalignment_db).c_str(), row.gate_duty,
                    row.status.c_str());
        if (row.status != "ok") all_ok = false;
    }
    return all_ok ? 0 : 1;
}

int cmd_metrics(const std::string& p_path, const std::string& w_path, int fs,
                int fft, double lo, double hi) {
    require_file(p_path, "impulse response");
    require_file(w_path, "impulse response");
    const asc::PathModel p{asc::read_ir(p_path)};
    const asc::FullbandFilter w{asc::read_ir(w_path)};
    const auto band = asc::LsdBand::from_hz(lo, hi, fft, fs);
    const auto l = asc::lsd(p, w, band);
    std::printf("LSD: %s (band %d..%d of %d bins", asc::format_db(l.db).c_str(),
                band.k1, band.k2, band.fft_size);
    if (l.floored_bins > 0) std::printf(", %d floored bins", l.floored_bins);
    std::printf(")\n");
    std::printf("misalignment: %s\n",
                asc::format_db(asc::misalignment(p, w)).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detection-gated active snoring cancellation simulator"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic snore corpus file");
    std::string synth_out = "corpus";
    double synth_duration = 600.0;
    std::uint64_t synth_seed = 1;
    int synth_fs = 44100;
    double synth_ratio = 0.128, synth_amp = 0.3;
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--duration", synth_duration, "Duration in seconds");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--fs", synth_fs, "Sample rate in Hz");
    synth->add_option("--ratio", synth_ratio, "Target snore time ratio");
    synth->add_option("--amplitude", synth_amp, "Event peak amplitude");

    // detect
    auto* detect = app.add_subcommand("detect", "Run a detector over a WAV file");
    std::string det_in, det_kind = "energy", det_weights, det_ann, det_out = "preds.txt",
                det_probs;
    double det_threshold = -18.0;
    detect->add_option("--in", det_in, "Input WAV")->required();
    detect->add_option("--detector", det_kind, "energy | crnn | oracle");
    detect->add_option("--threshold", det_threshold,
                       "Energy threshold (natural-log units)");
    detect->add_option("--weights", det_weights, "CRNN weights (.sadw)");
    detect->add_option("--annotations", det_ann, "Annotation CSV for the oracle");
    detect->add_option("--out", det_out, "Prediction stream (.txt or .bits)");
    detect->add_option("--probs", det_probs, "Optional probability CSV");

    // hangover
    auto* hang = app.add_subcommand("hangover", "Post-process a prediction stream");
    std::string hang_in, hang_out = "post.txt", hang_wav, hang_trace;
    std::size_t hang_x = 3, hang_k = 100;
    hang->add_option("--in", hang_in, "Input prediction stream")->required();
    hang->add_option("--out", hang_out, "Output prediction stream");
    hang->add_option("--x", hang_x, "Majority window size (odd)");
    hang->add_option("--k", hang_k, "Forced ones per onset");
    hang->add_option("--wav", hang_wav, "WAV for the trace amplitude column");
    hang->add_option("--trace", hang_trace, "Plot-data CSV (time, amplitude, raw, post)");

    // cancel
    auto* cancel = app.add_subcommand("cancel", "Single cancellation run");
    std::string can_config, can_sad = "on", can_out = "cancel_out";
    double can_snr = 10.0;
    std::uint64_t can_seed = 0;
    cancel->add_option("--config", can_config, "Config file (TOML or JSON)");
    cancel->add_option("--snr", can_snr, "SNR of d(n) in dB");
    cancel->add_option("--sad", can_sad, "on | off")
        ->check(CLI::IsMember({"on", "off"}));
    cancel->add_option("--outdir", can_out, "Output directory");
    auto* can_seed_opt = cancel->add_option("--seed", can_seed, "Master seed");

    // experiment
    auto* exper = app.add_subcommand("experiment", "SNR x SAD-mode sweep");
    std::string exp_config, exp_outdir, exp_sad;
    std::vector<double> exp_snrs;
    std::uint64_t exp_seed = 0;
    double exp_duration = 0.0;
    bool exp_no_parallel = false, exp_traces = false;
    exper->add_option("--config", exp_config, "Config file (TOML or JSON)");
    auto* exp_seed_opt = exper->add_option("--seed", exp_seed, "Master seed");
    exper->add_option("--outdir", exp_outdir, "Output directory");
    exper->add_option("--snr", exp_snrs, "SNR list override (repeatable)");
    exper->add_option("--sad-mode", exp_sad, "on | off | both")
        ->check(CLI::IsMember({"on", "off", "both"}));
    auto* exp_dur_opt = exper->add_option("--duration", exp_duration,
                                          "Synthetic input duration (s)");
    exper->add_flag("--no-parallel", exp_no_parallel, "Run rows sequentially");
    exper->add_flag("--traces", exp_traces, "Emit the prediction trace CSV");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "LSD and misalignment of two IRs");
    std::string met_p, met_w;
    int met_fs = 44100, met_fft = 4096;
    double met_lo = 100.0, met_hi = 20000.0;
    metrics->add_option("--p", met_p, "Measured path (.wav or .f32)")->required();
    metrics->add_option("--w", met_w, "Estimated path (.wav or .f32)")->required();
    metrics->add_option("--fs", met_fs, "Sample rate in Hz");
    metrics->add_option("--fft", met_fft, "Transform size");
    metrics->add_option("--lo", met_lo, "Band low edge (Hz)");
    metrics->add_option("--hi", met_hi, "Band high edge (Hz)");

    try {
        app.parse(argc, argv);
        if (*synth)
            return cmd_synth(synth_out, synth_duration, synth_seed, synth_fs,
                             synth_ratio, synth_amp);
        if (*detect)
            return cmd_detect(det_in, det_kind, det_threshold, det_weights, det_ann,
                              det_out, det_probs);
        if (*hang)
            return cmd_hangover(hang_in, hang_out, hang_x, hang_k, hang_wav,
                                hang_trace);
        if (*cancel)
            return cmd_cancel(can_config, can_snr, can_sad, can_out, can_seed,
                              can_seed_opt->count() > 0);
        if (*exper)
            return cmd_experiment(exp_config, exp_seed, exp_seed_opt->count() > 0,
                                  exp_outdir, exp_snrs, exp_sad, exp_duration,
                                  exp_dur_opt->count() > 0, exp_no_parallel,
                                  exp_traces);
        if (*metrics)
            return cmd_metrics(met_p, met_w, met_fs, met_fft, met_lo, met_hi);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
