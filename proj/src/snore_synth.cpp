#include "asc/snore_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "asc/rng.hpp"

namespace asc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// one harmonic-stack phase over [s0, s1) of `seg`
void render_phase(std::vector<double>& seg, std::size_t s0, std::size_t s1,
                  double f0, int harmonics, int fs, double attack_s, Rng& rng) {
    const std::size_t n = s1 - s0;
    if (n == 0) return;
    const double phase0 = rng.uniform(0.0, kTwoPi);
    const double nyq = 0.45 * fs;
    std::size_t ramp = static_cast<std::size_t>(attack_s * fs);
    ramp = std::max<std::size_t>(1, std::min(ramp, n / 2));
    for (int h = 1; h <= harmonics; ++h) {
        const double f = h * f0;
        if (f >= nyq) break;
        const double amp = 1.0 / h;
        const double w = kTwoPi * f / fs;
        const double ph = phase0 * h;
        for (std::size_t i = 0; i < n; ++i)
            seg[s0 + i] += amp * std::sin(w * static_cast<double>(i) + ph);
    }
    for (std::size_t i = 0; i < ramp; ++i) {
        const double g = 0.5 * (1.0 - std::cos(kTwoPi / 2.0 * i / ramp));
        seg[s0 + i] *= g;
        seg[s1 - 1 - i] *= g;
    }
}

}  // namespace

SnoreSignal generate_snore(const SnoreProfile& profile, double duration_s, int fs) {
    if (duration_s <= 0.0) throw std::invalid_argument("generate_snore: duration must be positive");
    if (fs <= 0) throw std::invalid_argument("generate_snore: bad sample rate");
    if (!(profile.snore_ratio > 0.0 && profile.snore_ratio < 1.0))
        throw std::invalid_argument("generate_snore: snore_ratio must be in (0,1)");
    const double min_span = profile.event_min_s / profile.snore_ratio;
    if (duration_s < min_span)
        throw std::invalid_argument("generate_snore: duration too short for the requested ratio");

    const auto total = static_cast<std::size_t>(duration_s * fs);
    SnoreSignal out;
    out.signal.sample_rate_hz = fs;
    out.signal.samples.assign(total, 0.0);
    auto& x = out.signal.samples;

    Rng rng(profile.seed);

    // ambient floor
    const double bg = profile.event_amplitude * std::pow(10.0, profile.background_db / 20.0);
    for (auto& v : x) v = bg * rng.normal();

    const double ratio = profile.snore_ratio;
    double t = rng.uniform(0.5, 2.0);
    while (true) {
        const double ev = rng.uniform(profile.event_min_s, profile.event_max_s);
        const auto s0 = static_cast<std::size_t>(t * fs);
        const auto s1 = static_cast<std::size_t>((t + ev) * fs);
        if (s1 >= total) break;

        std::vector<double> seg(s1 - s0, 0.0);
        const std::size_t mid = seg.size() / 2;
        const double f_in = rng.uniform(profile.inspiration_low_hz, profile.inspiration_high_hz);
        const double f_ex = rng.uniform(profile.expiration_low_hz, profile.expiration_high_hz);
        render_phase(seg, 0, mid, f_in, profile.harmonics, fs, profile.attack_s, rng);
        render_phase(seg, mid, seg.size(), f_ex, profile.harmonics, fs, profile.attack_s, rng);

        double peak = 0.0, pow_acc = 0.0;
        for (double v : seg) {
            peak = std::max(peak, std::abs(v));
            pow_acc += v * v;
        }
        if (peak > 0.0) {
            const double g = profile.event_amplitude / peak;
            for (auto& v : seg) v *= g;
            pow_acc *= g * g;
        }
        const double rms = std::sqrt(pow_acc / static_cast<double>(seg.size()));

        // turbulent breath noise, one-pole lowpass, faded at the edges
        const double bn_rms = rms * std::pow(10.0, profile.breath_noise_db / 20.0);
        const double a = profile.breath_pole;
        double state = 0.0;
        std::size_t ramp = std::max<std::size_t>(
            1, std::min(static_cast<std::size_t>(profile.attack_s * fs), (s1 - s0) / 2));
        double bn_pow = 0.0;
        std::vector<double> bn(s1 - s0);
        for (std::size_t i = 0; i < bn.size(); ++i) {
            state = (1.0 - a) * rng.normal() + a * state;
            bn[i] = state;
            bn_pow += state * state;
        }
        const double bn_scale =
            bn_pow > 0.0 ? bn_rms / std::sqrt(bn_pow / static_cast<double>(bn.size())) : 0.0;
        for (std::size_t i = 0; i < bn.size(); ++i) {
            double g = bn_scale;
            if (i < ramp) g *= static_cast<double>(i) / ramp;
            if (bn.size() - 1 - i < ramp) g *= static_cast<double>(bn.size() - 1 - i) / ramp;
            seg[i] += g * bn[i];
        }

        for (std::size_t i = 0; i < seg.size(); ++i) x[s0 + i] += seg[i];
        out.annotations.push_back({t, t + ev});

        t += ev + ev * (1.0 - ratio) / ratio * rng.uniform(0.8, 1.2);
        if (t >= duration_s) break;
    }

    for (auto& v : x) v = std::clamp(v, -1.0, 1.0);
    return out;
}

std::vector<std::uint8_t> annotations_to_frames(const std::vector<SnoreEvent>& events,
                                                double hop_ms, std::size_t frames) {
    double prev_end = -1.0;
    for (const auto& e : events) {
        if (e.end_s < e.start_s || e.start_s < prev_end)
            throw std::invalid_argument(
                "annotations_to_frames: intervals must be sorted and non-overlapping");
        prev_end = e.end_s;
    }
    std::vector<std::uint8_t> out(frames, 0);
    const double hop_s = hop_ms / 1000.0;
    std::size_t ei = 0;
    for (std::size_t i = 0; i < frames; ++i) {
        const double center = (static_cast<double>(i) + 0.5) * hop_s;
        while (ei < events.size() && events[ei].end_s <= center) ++ei;
        if (ei < events.size() && events[ei].start_s <= center && center < events[ei].end_s)
            out[i] = 1;
    }
    return out;
}

std::vector<std::uint8_t> annotations_to_samples(const std::vector<SnoreEvent>& events,
                                                 int sample_rate_hz,
                                                 std::size_t total_samples) {
    std::vector<std::uint8_t> out(total_samples, 0);
    for (const auto& e : events) {
        auto a = static_cast<std::size_t>(std::max(0.0, e.start_s) * sample_rate_hz);
        auto b = static_cast<std::size_t>(std::max(0.0, e.end_s) * sample_rate_hz);
        a = std::min(a, total_samples);
        b = std::min(b, total_samples);
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(a),
                  out.begin() + static_cast<std::ptrdiff_t>(b), 1);
    }
    return out;
}

void save_annotations_csv(const std::string& path,
                          const std::vector<SnoreEvent>& events) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write annotation file: " + path);
    os << "start_s,end_s\r\n";
    char buf[80];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f\r\n", e.start_s, e.end_s);
        os << buf;
    }
}

std::vector<SnoreEvent> load_annotations_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open annotation file: " + path);
    std::vector<SnoreEvent> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.rfind("start_s", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("malformed annotation line: " + line);
        SnoreEvent e;
        e.start_s = std::stod(line.substr(0, comma));
        e.end_s = std::stod(line.substr(comma + 1));
        out.push_back(e);
    }
    return out;
}

}  // namespace asc
