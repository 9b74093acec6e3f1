#include "asc/crnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "asc/rng.hpp"

namespace asc {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'D', 'W'};
constexpr std::uint16_t kVersion = 1;
constexpr double kBnEps = 1e-3;
constexpr std::uint32_t kConvFilters = 32;
constexpr std::uint32_t kGruUnits = 32;
constexpr int kPool[3] = {5, 4, 2};

struct LayerSpec {
    std::string name;
    std::vector<std::uint32_t> dims;
};

std::vector<LayerSpec> expected_layers() {
    std::vector<LayerSpec> specs;
    std::uint32_t in_ch = 1;
    for (int b = 1; b <= 3; ++b) {
        const std::string p = "conv" + std::to_string(b);
        specs.push_back({p + ".kernel", {3, 3, in_ch, kConvFilters}});
        specs.push_back({p + ".bias", {kConvFilters}});
        for (const char* s : {".bn.gamma", ".bn.beta", ".bn.mean", ".bn.variance"})
            specs.push_back({p + s, {kConvFilters}});
        in_ch = kConvFilters;
    }
    for (int b = 1; b <= 2; ++b) {
        const std::string p = "gru" + std::to_string(b);
        for (const char* s : {".wz", ".wr", ".wc"})
            specs.push_back({p + s, {kGruUnits, kGruUnits}});
        for (const char* s : {".uz", ".ur", ".uc"})
            specs.push_back({p + s, {kGruUnits, kGruUnits}});
        for (const char* s : {".bz", ".br", ".bc"})
            specs.push_back({p + s, {kGruUnits}});
    }
    specs.push_back({"out.kernel", {kGruUnits, 1}});
    specs.push_back({"out.bias", {1}});
    return specs;
}

double hard_sigmoid(double x) { return std::clamp(0.2 * x + 0.5, 0.0, 1.0); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void CrnnWeights::validate() const {
    if (n_mels != 40)
        throw std::invalid_argument(
            "crnn weights: n_mels must be 40 (pooling chain 5*4*2), got " +
            std::to_string(n_mels));
    for (const auto& spec : expected_layers()) {
        const auto it = layers.find(spec.name);
        if (it == layers.end())
            throw std::invalid_argument("crnn weights: missing layer '" +
                                        std::string(spec.name) + "'");
        const Tensor& t = it->second;
        if (t.dims != spec.dims) {
            std::string want, got;
            for (auto d : spec.dims) want += std::to_string(d) + ",";
            for (auto d : t.dims) got += std::to_string(d) + ",";
            throw std::invalid_argument("crnn weights: layer '" +
                                        std::string(spec.name) + "' expected dims [" +
                                        want + "] got [" + got + "]");
        }
        if (t.data.size() != t.count())
            throw std::invalid_argument("crnn weights: layer '" +
                                        std::string(spec.name) + "' data size mismatch");
    }
}

CrnnWeights CrnnWeights::zeros() {
    CrnnWeights w;
    for (const auto& spec : expected_layers()) {
        Tensor t;
        t.dims = spec.dims;
        t.data.assign(t.count(), 0.0f);
        w.layers.emplace(spec.name, std::move(t));
    }
    return w;
}

CrnnWeights CrnnWeights::random(std::uint64_t seed, double scale) {
    CrnnWeights w = zeros();
    Rng rng(seed);
    for (auto& [name, t] : w.layers) {
        const bool variance = name.ends_with(".variance");
        const bool gamma = name.ends_with(".gamma");
        for (auto& v : t.data) {
            if (variance)
                v = static_cast<float>(rng.uniform(0.5, 1.5));
            else if (gamma)
                v = static_cast<float>(rng.uniform(0.5, 1.5));
            else
                v = static_cast<float>(rng.normal() * scale);
        }
    }
    return w;
}

namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_f32(std::ostream& os, float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}

std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(std::istream& is) {
    const std::uint32_t u = get_u32(is);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

}  // namespace

void save_weights(const std::string& path, const CrnnWeights& w) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write weights file: " + path);
    os.write(kMagic, 4);
    put_u16(os, kVersion);
    put_u32(os, w.n_mels);
    put_u32(os, w.win_ms);
    put_u32(os, w.hop_ms);
    put_u32(os, static_cast<std::uint32_t>(w.mel_variant.size()));
    os.write(w.mel_variant.data(), static_cast<std::streamsize>(w.mel_variant.size()));
    put_f32(os, w.leaky_slope);
    put_u32(os, static_cast<std::uint32_t>(w.layers.size()));
    for (const auto& [name, t] : w.layers) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
        for (auto d : t.dims) put_u32(os, d);
        for (float v : t.data) put_f32(os, v);
    }
    if (!os) throw std::runtime_error("short write to weights file: " + path);
}

CrnnWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open weights file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a SADW weights file: " + path);
    const auto version = get_u16(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported SADW version " + std::to_string(version));
    CrnnWeights w;
    w.n_mels = get_u32(is);
    w.win_ms = get_u32(is);
    w.hop_ms = get_u32(is);
    const auto mlen = get_u32(is);
    w.mel_variant.resize(mlen);
    is.read(w.mel_variant.data(), mlen);
    w.leaky_slope = get_f32(is);
    const auto count = get_u32(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto nlen = get_u32(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        Tensor t;
        const auto rank = get_u32(is);
        t.dims.resize(rank);
        for (auto& d : t.dims) d = get_u32(is);
        t.data.resize(t.count());
        for (auto& v : t.data) v = get_f32(is);
        if (!is) throw std::runtime_error("truncated weights file: " + path);
        w.layers.emplace(std::move(name), std::move(t));
    }
    return w;
}

namespace {

// dense grid helpers; conv data is [time][mel][channel]
struct Grid {
    std::vector<double> v;
    std::size_t T = 0;
    int Mels = 0, C = 0;

    double& at(std::size_t t, int m, int c) {
        return v[(t * Mels + m) * static_cast<std::size_t>(C) + c];
    }
    double get(long long t, int m, int c) const {
        if (t < 0 || t >= static_cast<long long>(T) || m < 0 || m >= Mels)
            return 0.0;  // same padding
        return v[(static_cast<std::size_t>(t) * Mels + m) * static_cast<std::size_t>(C) + c];
    }
};

const Tensor& layer(const CrnnWeights& w, const std::string& name) {
    return w.layers.at(name);
}

void conv_block(const CrnnWeights& w, const std::string& prefix, const Grid& in,
                Grid& out, int pool) {
    const Tensor& kern = layer(w, prefix + ".kernel");
    const Tensor& bias = layer(w, prefix + ".bias");
    const Tensor& gamma = layer(w, prefix + ".bn.gamma");
    const Tensor& beta = layer(w, prefix + ".bn.beta");
    const Tensor& mean = layer(w, prefix + ".bn.mean");
    const Tensor& var = layer(w, prefix + ".bn.variance");
    const int ci_n = static_cast<int>(kern.dims[2]);
    const int co_n = static_cast<int>(kern.dims[3]);
    const double slope = w.leaky_slope;

    Grid conv;
    conv.T = in.T;
    conv.Mels = in.Mels;
    conv.C = co_n;
    conv.v.assign(in.T * in.Mels * static_cast<std::size_t>(co_n), 0.0);
    auto kat = [&](int dt, int dm, int ci, int co) {
        return static_cast<double>(
            kern.data[((static_cast<std::size_t>(dt) * 3 + dm) * ci_n + ci) * co_n + co]);
    };
    for (std::size_t t = 0; t < in.T; ++t)
        for (int m = 0; m < in.Mels; ++m)
            for (int co = 0; co < co_n; ++co) {
                double acc = bias.data[co];
                for (int dt = 0; dt < 3; ++dt)
                    for (int dm = 0; dm < 3; ++dm)
                        for (int ci = 0; ci < ci_n; ++ci)
                            acc += kat(dt, dm, ci, co) *
                                   in.get(static_cast<long long>(t) + dt - 1,
                                          m + dm - 1, ci);
                // inference batch norm, then leaky relu
                const double bn = (acc - mean.data[co]) /
                                      std::sqrt(static_cast<double>(var.data[co]) + kBnEps) *
                                      gamma.data[co] +
                                  beta.data[co];
                conv.at(t, m, co) = bn > 0.0 ? bn : slope * bn;
            }

    out.T = conv.T;
    out.Mels = conv.Mels / pool;
    out.C = co_n;
    out.v.assign(out.T * out.Mels * static_cast<std::size_t>(co_n), 0.0);
    for (std::size_t t = 0; t < out.T; ++t)
        for (int m = 0; m < out.Mels; ++m)
            for (int c = 0; c < co_n; ++c) {
                double best = conv.get(static_cast<long long>(t), m * pool, c);
                for (int i = 1; i < pool; ++i)
                    best = std::max(best, conv.get(static_cast<long long>(t),
                                                   m * pool + i, c));
                out.at(t, m, c) = best;
            }
}

void gru_layer(const CrnnWeights& w, const std::string& prefix,
               std::vector<double>& seq, std::size_t T, int dim) {
    const Tensor& wz = layer(w, prefix + ".wz");
    const Tensor& wr = layer(w, prefix + ".wr");
    const Tensor& wc = layer(w, prefix + ".wc");
    const Tensor& uz = layer(w, prefix + ".uz");
    const Tensor& ur = layer(w, prefix + ".ur");
    const Tensor& uc = layer(w, prefix + ".uc");
    const Tensor& bz = layer(w, prefix + ".bz");
    const Tensor& br = layer(w, prefix + ".br");
    const Tensor& bc = layer(w, prefix + ".bc");
    const int units = static_cast<int>(bz.dims[0]);

    std::vector<double> h(units, 0.0), z(units), r(units), c(units), out(T * units);
    auto mat = [&](const Tensor& t, const double* x, int rows, int col) {
        double acc = 0.0;
        for (int i = 0; i < rows; ++i)
            acc += x[i] * static_cast<double>(t.data[static_cast<std::size_t>(i) * units + col]);
        return acc;
    };
    for (std::size_t t = 0; t < T; ++t) {
        const double* x = seq.data() + t * static_cast<std::size_t>(dim);
        for (int j = 0; j < units; ++j) {
            z[j] = hard_sigmoid(mat(wz, x, dim, j) + mat(uz, h.data(), units, j) +
                                bz.data[j]);
            r[j] = hard_sigmoid(mat(wr, x, dim, j) + mat(ur, h.data(), units, j) +
                                br.data[j]);
        }
        std::vector<double> rh(units);
        for (int j = 0; j < units; ++j) rh[j] = r[j] * h[j];
        for (int j = 0; j < units; ++j)
            c[j] = std::tanh(mat(wc, x, dim, j) + mat(uc, rh.data(), units, j) +
                             bc.data[j]);
        for (int j = 0; j < units; ++j) h[j] = z[j] * h[j] + (1.0 - z[j]) * c[j];
        std::copy(h.begin(), h.end(), out.begin() + t * static_cast<std::size_t>(units));
    }
    seq = std::move(out);
}

}  // namespace

std::vector<double> crnn_forward(const MelFeatureMatrix& features,
                                 const CrnnWeights& weights) {
    weights.validate();
    if (features.n_mels != static_cast<int>(weights.n_mels))
        throw std::invalid_argument("crnn_forward: feature n_mels does not match weights");
    const std::size_t T = features.frames;
    if (T == 0) return {};

    Grid g;
    g.T = T;
    g.Mels = features.n_mels;
    g.C = 1;
    g.v = features.data;

    Grid g2;
    const char* prefixes[3] = {"conv1", "conv2", "conv3"};
    for (int b = 0; b < 3; ++b) {
        conv_block(weights, prefixes[b], g, g2, kPool[b]);
        g = std::move(g2);
    }
    if (g.Mels != 1)
        throw std::invalid_argument("crnn_forward: pooling chain did not reduce Mel axis to 1");

    // flatten: per frame the single Mel position's 32 channels
    const int units = static_cast<int>(kGruUnits);
    std::vector<double> seq = std::move(g.v);
    gru_layer(weights, "gru1", seq, T, units);
    gru_layer(weights, "gru2", seq, T, units);

    const Tensor& ok = layer(weights, "out.kernel");
    const Tensor& ob = layer(weights, "out.bias");
    std::vector<double> probs(T);
    for (std::size_t t = 0; t < T; ++t) {
        double acc = ob.data[0];
        for (int i = 0; i < units; ++i)
            acc += seq[t * static_cast<std::size_t>(units) + i] *
                   static_cast<double>(ok.data[i]);
        probs[t] = sigmoid(acc);
    }
    return probs;
}

}  // namespace asc
