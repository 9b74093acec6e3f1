#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "asc/crnn.hpp"
#include "asc/rng.hpp"

namespace {

// Independent straight-line re-implementation of the forward pass used as
// the oracle.  Different data layout ([channel][time][mel]) and explicit
// bounds handling on purpose.
std::vector<double> reference_forward(const asc::MelFeatureMatrix& feats,
                                      const asc::CrnnWeights& w) {
    const int T = static_cast<int>(feats.frames);
    const double slope = w.leaky_slope;
    const double bn_eps = 1e-3;

    using Cube = std::vector<std::vector<std::vector<double>>>;  // [c][t][m]
    Cube cur(1, std::vector<std::vector<double>>(
                    static_cast<std::size_t>(T), std::vector<double>(40, 0.0)));
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < 40; ++m)
            cur[0][static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] =
                feats.at(static_cast<std::size_t>(t), m);

    const int pools[3] = {5, 4, 2};
    const char* names[3] = {"conv1", "conv2", "conv3"};
    for (int blk = 0; blk < 3; ++blk) {
        const auto& kern = w.layers.at(std::string(names[blk]) + ".kernel");
        const auto& bias = w.layers.at(std::string(names[blk]) + ".bias");
        const auto& gam = w.layers.at(std::string(names[blk]) + ".bn.gamma");
        const auto& bet = w.layers.at(std::string(names[blk]) + ".bn.beta");
        const auto& mea = w.layers.at(std::string(names[blk]) + ".bn.mean");
        const auto& var = w.layers.at(std::string(names[blk]) + ".bn.variance");
        const int ci_n = static_cast<int>(kern.dims[2]);
        const int mels = static_cast<int>(cur[0][0].size());

        Cube nxt(32, std::vector<std::vector<double>>(
                         static_cast<std::size_t>(T),
                         std::vector<double>(static_cast<std::size_t>(mels), 0.0)));
        for (int co = 0; co < 32; ++co)
            for (int t = 0; t < T; ++t)
                for (int m = 0; m < mels; ++m) {
                    double acc = bias.data[static_cast<std::size_t>(co)];
                    for (int dt = -1; dt <= 1; ++dt)
                        for (int dm = -1; dm <= 1; ++dm) {
                            const int tt = t + dt, mm = m + dm;
                            if (tt < 0 || tt >= T || mm < 0 || mm >= mels) continue;
                            for (int ci = 0; ci < ci_n; ++ci) {
                                const std::size_t kidx =
                                    ((static_cast<std::size_t>(dt + 1) * 3 +
                                      static_cast<std::size_t>(dm + 1)) *
                                         static_cast<std::size_t>(ci_n) +
                                     static_cast<std::size_t>(ci)) *
                                        32 +
                                    static_cast<std::size_t>(co);
                                acc += static_cast<double>(kern.data[kidx]) *
                                       cur[static_cast<std::size_t>(ci)]
                                          [static_cast<std::size_t>(tt)]
                                          [static_cast<std::size_t>(mm)];
                            }
                        }
                    const double normed =
                        (acc - mea.data[static_cast<std::size_t>(co)]) /
                            std::sqrt(static_cast<double>(
                                          var.data[static_cast<std::size_t>(co)]) +
                                      bn_eps) *
                            gam.data[static_cast<std::size_t>(co)] +
                        bet.data[static_cast<std::size_t>(co)];
                    nxt[static_cast<std::size_t>(co)][static_cast<std::size_t>(t)]
                       [static_cast<std::size_t>(m)] =
                           normed > 0.0 ? normed : slope * normed;
                }

        // max pool along the mel axis
        const int pooled = mels / pools[blk];
        Cube out(32, std::vector<std::vector<double>>(
                         static_cast<std::size_t>(T),
                         std::vector<double>(static_cast<std::size_t>(pooled), 0.0)));
        for (int c = 0; c < 32; ++c)
            for (int t = 0; t < T; ++t)
                for (int m = 0; m < pooled; ++m) {
                    double best = -1e300;
                    for (int i = 0; i < pools[blk]; ++i)
                        best = std::max(best, nxt[static_cast<std::size_t>(c)]
                                                 [static_cast<std::size_t>(t)]
                                                 [static_cast<std::size_t>(
                                                     m * pools[blk] + i)]);
                    out[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)]
                       [static_cast<std::size_t>(m)] = best;
                }
        cur = std::move(out);
    }

    // time sequence of 32-channel vectors (single mel bin left)
    std::vector<std::vector<double>> seq(static_cast<std::size_t>(T),
                                         std::vector<double>(32, 0.0));
    for (int t = 0; t < T; ++t)
        for (int c = 0; c < 32; ++c)
            seq[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] =
                cur[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)][0];

    auto hard_sig = [](double v) {
        const double y = 0.2 * v + 0.5;
        return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
    };
    for (const char* g : {"gru1", "gru2"}) {
        const auto& wz = w.layers.at(std::string(g) + ".wz");
        const auto& wr = w.layers.at(std::string(g) + ".wr");
        const auto& wc = w.layers.at(std::string(g) + ".wc");
        const auto& uz = w.layers.at(std::string(g) + ".uz");
        const auto& ur = w.layers.at(std::string(g) + ".ur");
        const auto& uc = w.layers.at(std::string(g) + ".uc");
        const auto& bz = w.layers.at(std::string(g) + ".bz");
        const auto& br = w.layers.at(std::string(g) + ".br");
        const auto& bc = w.layers.at(std::string(g) + ".bc");
        std::vector<double> h(32, 0.0);
        std::vector<std::vector<double>> out(static_cast<std::size_t>(T),
                                             std::vector<double>(32, 0.0));
        for (int t = 0; t < T; ++t) {
            const auto& x = seq[static_cast<std::size_t>(t)];
            std::vector<double> z(32), r(32), c(32);
            for (int j = 0; j < 32; ++j) {
                double az = bz.data[static_cast<std::size_t>(j)];
                double ar = br.data[static_cast<std::size_t>(j)];
                for (int i = 0; i < 32; ++i) {
                    az += x[static_cast<std::size_t>(i)] *
                          wz.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                    az += h[static_cast<std::size_t>(i)] *
                          uz.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                    ar += x[static_cast<std::size_t>(i)] *
                          wr.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                    ar += h[static_cast<std::size_t>(i)] *
                          ur.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                }
                z[static_cast<std::size_t>(j)] = hard_sig(az);
                r[static_cast<std::size_t>(j)] = hard_sig(ar);
            }
            for (int j = 0; j < 32; ++j) {
                double ac = bc.data[static_cast<std::size_t>(j)];
                for (int i = 0; i < 32; ++i) {
                    ac += x[static_cast<std::size_t>(i)] *
                          wc.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                    // reset gate scales the recurrent term before the kernel
                    ac += r[static_cast<std::size_t>(i)] *
                          h[static_cast<std::size_t>(i)] *
                          uc.data[static_cast<std::size_t>(i) * 32 +
                                  static_cast<std::size_t>(j)];
                }
                c[static_cast<std::size_t>(j)] = std::tanh(ac);
            }
            for (int j = 0; j < 32; ++j)
                h[static_cast<std::size_t>(j)] =
                    z[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)] +
                    (1.0 - z[static_cast<std::size_t>(j)]) *
                        c[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(t)] = h;
        }
        seq = std::move(out);
    }

    const auto& ok = w.layers.at("out.kernel");
    const auto& ob = w.layers.at("out.bias");
    std::vector<double> probs(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        double a = ob.data[0];
        for (int i = 0; i < 32; ++i)
            a += seq[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] *
                 ok.data[static_cast<std::size_t>(i)];
        probs[static_cast<std::size_t>(t)] = 1.0 / (1.0 + std::exp(-a));
    }
    return probs;
}

asc::MelFeatureMatrix random_features(std::uint64_t seed, std::size_t frames) {
    asc::MelFeatureMatrix f;
    f.frames = frames;
    f.n_mels = 40;
    f.data.resize(frames * 40);
    asc::Rng rng(seed);
    for (auto& v : f.data) v = rng.normal();
    return f;
}

}  // namespace

TEST_CASE("crnn_forward: all-zero network answers 0.5 everywhere") {
    const auto w = asc::CrnnWeights::zeros();
    const auto probs = asc::crnn_forward(random_features(1, 12), w);
    REQUIRE(probs.size() == 12);
    for (double p : probs) CHECK(p == 0.5);
}

TEST_CASE("crnn_forward: outputs stay inside (0, 1)") {
    const auto w = asc::CrnnWeights::random(9, 0.5);
    const auto probs = asc::crnn_forward(random_features(2, 20), w);
    for (double p : probs) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("crnn_forward: deterministic") {
    const auto w = asc::CrnnWeights::random(3, 0.3);
    const auto f = random_features(4, 15);
    const auto a = asc::crnn_forward(f, w);
    const auto b = asc::crnn_forward(f, w);
    CHECK(a == b);
}

TEST_CASE("crnn_forward agrees with the independent reference to 1e-5") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        const auto w = asc::CrnnWeights::random(seed, 0.4);
        const auto f = random_features(seed + 100, 17);
        const auto got = asc::crnn_forward(f, w);
        const auto ref = reference_forward(f, w);
        REQUIRE(got.size() == ref.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - ref[i]) < 1e-5);
    }
}

TEST_CASE("crnn weights: dimension errors name the layer") {
    auto w = asc::CrnnWeights::random(5, 0.2);
    w.layers.at("conv2.kernel").dims = {3, 3, 1, 32};
    try {
        w.validate();
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("conv2.kernel") != std::string::npos);
    }

    auto w2 = asc::CrnnWeights::random(6, 0.2);
    w2.layers.erase("gru1.uz");
    try {
        w2.validate();
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("gru1.uz") != std::string::npos);
    }
}

TEST_CASE("crnn weights: pooling chain requires 40 mel bins") {
    auto w = asc::CrnnWeights::random(7, 0.2);
    w.n_mels = 32;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("crnn weights: SADW save/load round trip preserves the forward pass") {
    const auto w = asc::CrnnWeights::random(21, 0.4);
    const std::string path = "test_weights.sadw";
    asc::save_weights(path, w);
    const auto back = asc::load_weights(path);
    CHECK(back.n_mels == w.n_mels);
    CHECK(back.win_ms == w.win_ms);
    CHECK(back.hop_ms == w.hop_ms);
    CHECK(back.mel_variant == w.mel_variant);
    CHECK(back.leaky_slope == w.leaky_slope);
    const auto f = random_features(22, 9);
    CHECK(asc::crnn_forward(f, w) == asc::crnn_forward(f, back));
    std::remove(path.c_str());
}

TEST_CASE("crnn weights: malformed files rejected") {
    const std::string path = "test_bad.sadw";
    {
        std::FILE* fp = std::fopen(path.c_str(), "wb");
        std::fputs("NOPE", fp);
        std::fclose(fp);
    }
    CHECK_THROWS_AS(asc::load_weights(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(asc::load_weights("does_not_exist.sadw"), std::runtime_error);
}
