#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "asc/features.hpp"
#include "asc/fft.hpp"
#include "asc/snore_synth.hpp"

TEST_CASE("generate_snore: deterministic for a fixed seed") {
    asc::SnoreProfile profile;
    profile.seed = 42;
    const auto a = asc::generate_snore(profile, 30.0, 8000);
    const auto b = asc::generate_snore(profile, 30.0, 8000);
    CHECK(a.signal.samples == b.signal.samples);
    REQUIRE(a.annotations.size() == b.annotations.size());
    for (std::size_t i = 0; i < a.annotations.size(); ++i) {
        CHECK(a.annotations[i].start_s == b.annotations[i].start_s);
        CHECK(a.annotations[i].end_s == b.annotations[i].end_s);
    }
}

TEST_CASE("generate_snore: amplitude bounded in [-1, 1]") {
    asc::SnoreProfile profile;
    profile.seed = 7;
    const auto s = asc::generate_snore(profile, 60.0, 8000);
    for (double v : s.signal.samples) {
        CHECK(v <= 1.0);
        CHECK(v >= -1.0);
    }
}

TEST_CASE("generate_snore: achieved ratio within 2 points of the target at 600 s") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        asc::SnoreProfile profile;
        profile.seed = seed;
        const auto s = asc::generate_snore(profile, 600.0, 8000);
        double active = 0.0;
        for (const auto& e : s.annotations) active += e.end_s - e.start_s;
        const double ratio = active / 600.0;
        CHECK(ratio >= 0.108);
        CHECK(ratio <= 0.148);
    }
}

TEST_CASE("generate_snore: at least 90 percent of event power below 3 kHz") {
    asc::SnoreProfile profile;
    profile.seed = 11;
    const int fs = 44100;
    const auto s = asc::generate_snore(profile, 40.0, fs);
    REQUIRE(!s.annotations.empty());
    double below = 0.0, total = 0.0;
    for (const auto& ev : s.annotations) {
        const auto a = static_cast<std::size_t>(ev.start_s * fs);
        const auto b = static_cast<std::size_t>(ev.end_s * fs);
        const std::size_t n = 1 << 16;
        std::vector<asc::cplx> buf(n, {0.0, 0.0});
        for (std::size_t i = a; i < b && i - a < n; ++i)
            buf[i - a] = s.signal.samples[i];
        asc::dft_inplace(buf);
        const auto edge = static_cast<std::size_t>(3000.0 * n / fs);
        for (std::size_t k = 1; k < n / 2; ++k) {
            const double p = std::norm(buf[k]);
            total += p;
            if (k <= edge) below += p;
        }
    }
    CHECK(below / total >= 0.90);
}

TEST_CASE("generate_snore: infeasible requests rejected") {
    asc::SnoreProfile profile;
    CHECK_THROWS_AS(asc::generate_snore(profile, -1.0, 8000), std::invalid_argument);
    CHECK_THROWS_AS(asc::generate_snore(profile, 5.0, 8000), std::invalid_argument);
    profile.snore_ratio = 1.5;
    CHECK_THROWS_AS(asc::generate_snore(profile, 600.0, 8000), std::invalid_argument);
}

TEST_CASE("annotations_to_frames: interval arithmetic") {
    CHECK(asc::annotations_to_frames({}, 10.0, 50) ==
          std::vector<std::uint8_t>(50, 0));

    const auto bits = asc::annotations_to_frames({{1.0, 2.0}}, 10.0, 400);
    std::size_t ones = 0;
    for (auto b : bits) ones += b;
    CHECK(ones == 100);

    CHECK_THROWS_AS(asc::annotations_to_frames({{1.0, 2.0}, {1.5, 3.0}}, 10.0, 400),
                    std::invalid_argument);
}

TEST_CASE("annotations_to_frames: grid-aligned intervals round trip") {
    const std::vector<asc::SnoreEvent> events{{0.20, 0.50}, {0.90, 1.30}};
    const auto bits = asc::annotations_to_frames(events, 10.0, 200);
    // rebuild intervals from the frame runs
    std::vector<asc::SnoreEvent> back;
    for (std::size_t i = 0; i < bits.size();) {
        if (!bits[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < bits.size() && bits[j]) ++j;
        back.push_back({i * 0.01, j * 0.01});
        i = j;
    }
    REQUIRE(back.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(back[i].start_s == doctest::Approx(events[i].start_s).epsilon(1e-12));
        CHECK(back[i].end_s == doctest::Approx(events[i].end_s).epsilon(1e-12));
    }
    CHECK(asc::annotations_to_frames(back, 10.0, 200) == bits);
}

TEST_CASE("annotation CSV round trip") {
    const std::vector<asc::SnoreEvent> events{{0.5, 2.25}, {10.0, 13.5}};
    const std::string path = "test_ann.csv";
    asc::save_annotations_csv(path, events);
    const auto back = asc::load_annotations_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].start_s == doctest::Approx(0.5));
    CHECK(back[1].end_s == doctest::Approx(13.5));
    std::remove(path.c_str());
}

TEST_CASE("energy detector agrees with the annotations on most frames") {
    asc::SnoreProfile profile;
    profile.seed = 23;
    const int fs = 44100;
    const auto s = asc::generate_snore(profile, 60.0, fs);
    const auto feats = asc::logmel(s.signal);
    const auto truth = asc::annotations_to_frames(s.annotations, 10.0, feats.frames);

    // threshold midway between mean event and mean gap frame energies
    double ev = 0.0, gap = 0.0;
    std::size_t nev = 0, ngap = 0;
    for (std::size_t t = 0; t < feats.frames; ++t) {
        double mean = 0.0;
        for (int m = 0; m < 40; ++m) mean += feats.at(t, m);
        mean /= 40.0;
        if (truth[t]) {
            ev += mean;
            ++nev;
        } else {
            gap += mean;
            ++ngap;
        }
    }
    REQUIRE(nev > 0);
    REQUIRE(ngap > 0);
    const double thr = 0.5 * (ev / nev + gap / ngap);
    const auto bits = asc::energy_detector(feats, thr);
    std::size_t agree = 0;
    for (std::size_t t = 0; t < feats.frames; ++t)
        if (bits[t] == truth[t]) ++agree;
    CHECK(static_cast<double>(agree) / feats.frames >= 0.95);
}
