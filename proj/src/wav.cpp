#include "asc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace asc {

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

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_wav_header(std::ostream& os, std::uint16_t format, std::uint16_t channels,
                      std::uint32_t rate, std::uint16_t bits, std::uint32_t data_bytes) {
    os.write("RIFF", 4);
    put_u32(os, 36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put_u32(os, 16);
    put_u16(os, format);
    put_u16(os, channels);
    put_u32(os, rate);
    put_u32(os, rate * channels * bits / 8);
    put_u16(os, static_cast<std::uint16_t>(channels * bits / 8));
    put_u16(os, bits);
    os.write("data", 4);
    put_u32(os, data_bytes);
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open wav file: " + path);
    std::vector<unsigned char> hdr(12);
    is.read(reinterpret_cast<char*>(hdr.data()), 12);
    if (!is || std::memcmp(hdr.data(), "RIFF", 4) != 0 ||
        std::memcmp(hdr.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    WavData out;
    bool got_fmt = false;

    unsigned char chunk[8];
    while (is.read(reinterpret_cast<char*>(chunk), 8)) {
        const std::uint32_t size = get_u32(chunk + 4);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            std::vector<unsigned char> fmt(size);
            is.read(reinterpret_cast<char*>(fmt.data()), size);
            if (size < 16) throw std::runtime_error("bad fmt chunk: " + path);
            format = get_u16(fmt.data());
            channels = get_u16(fmt.data() + 2);
            rate = get_u32(fmt.data() + 4);
            bits = get_u16(fmt.data() + 14);
            got_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            if (!got_fmt) throw std::runtime_error("data before fmt chunk: " + path);
            if (channels == 0) throw std::runtime_error("zero channels: " + path);
            std::vector<unsigned char> data(size);
            is.read(reinterpret_cast<char*>(data.data()), size);
            if (!is) throw std::runtime_error("truncated wav data: " + path);
            const std::size_t bytes_per = bits / 8;
            const std::size_t frames = size / (bytes_per * channels);
            out.sample_rate_hz = static_cast<int>(rate);
            out.channels.assign(channels, std::vector<double>(frames));
            const unsigned char* p = data.data();
            for (std::size_t f = 0; f < frames; ++f) {
                for (std::uint16_t c = 0; c < channels; ++c) {
                    double v = 0.0;
                    if (format == 1 && bits == 16) {
                        const auto raw = static_cast<std::int16_t>(get_u16(p));
                        v = raw / 32768.0;
                    } else if (format == 3 && bits == 32) {
                        float fv;
                        std::uint32_t u = get_u32(p);
                        std::memcpy(&fv, &u, 4);
                        v = fv;
                    } else {
                        throw std::runtime_error("unsupported wav encoding (format " +
                                                 std::to_string(format) + ", " +
                                                 std::to_string(bits) + " bit): " + path);
                    }
                    out.channels[c][f] = v;
                    p += bytes_per;
                }
            }
            return out;
        } else {
            is.seekg(size + (size & 1), std::ios::cur);
        }
    }
    throw std::runtime_error("wav file has no data chunk: " + path);
}

void write_wav_pcm16(const std::string& path,
                     const std::vector<std::vector<double>>& channels,
                     int sample_rate_hz) {
    if (channels.empty() || sample_rate_hz <= 0)
        throw std::invalid_argument("write_wav_pcm16: bad arguments");
    const std::size_t frames = channels[0].size();
    for (const auto& c : channels)
        if (c.size() != frames)
            throw std::invalid_argument("write_wav_pcm16: channel length mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write wav file: " + path);
    const auto nch = static_cast<std::uint16_t>(channels.size());
    write_wav_header(os, 1, nch, static_cast<std::uint32_t>(sample_rate_hz), 16,
                     static_cast<std::uint32_t>(frames * nch * 2));
    for (std::size_t f = 0; f < frames; ++f)
        for (const auto& c : channels) {
            const double v = std::clamp(c[f], -1.0, 1.0);
            const auto s = static_cast<std::int16_t>(std::lround(v * 32767.0));
            put_u16(os, static_cast<std::uint16_t>(s));
        }
    if (!os) throw std::runtime_error("short write: " + path);
}

void write_wav_pcm16(const std::string& path, const Signal& mono) {
    write_wav_pcm16(path, {mono.samples}, mono.sample_rate_hz);
}

void write_wav_float32(const std::string& path, const std::vector<double>& samples,
                       int sample_rate_hz) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write wav file: " + path);
    write_wav_header(os, 3, 1, static_cast<std::uint32_t>(sample_rate_hz), 32,
                     static_cast<std::uint32_t>(samples.size() * 4));
    for (double v : samples) {
        const auto fv = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &fv, 4);
        put_u32(os, u);
    }
    if (!os) throw std::runtime_error("short write: " + path);
}

std::vector<double> read_ir(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".f32") == 0) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("cannot open IR file: " + path);
        is.seekg(0, std::ios::end);
        const auto bytes = static_cast<std::size_t>(is.tellg());
        is.seekg(0);
        if (bytes % 4 != 0)
            throw std::runtime_error("raw float32 IR has odd size: " + path);
        std::vector<double> taps(bytes / 4);
        for (auto& t : taps) {
            unsigned char b[4];
            is.read(reinterpret_cast<char*>(b), 4);
            float fv;
            const std::uint32_t u = get_u32(b);
            std::memcpy(&fv, &u, 4);
            t = fv;
        }
        return taps;
    }
    const WavData w = read_wav(path);
    if (w.channels.empty()) throw std::runtime_error("empty IR file: " + path);
    return w.channels[0];
}

void write_ir_f32(const std::string& path, const std::vector<double>& taps) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write IR file: " + path);
    for (double v : taps) {
        const auto fv = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &fv, 4);
        put_u32(os, u);
    }
    if (!os) throw std::runtime_error("short write: " + path);
}

std::vector<std::uint8_t> read_prediction_stream(const std::string& path) {
    const bool packed =
        path.size() >= 5 && path.compare(path.size() - 5, 5, ".bits") == 0;
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open prediction stream: " + path);
    std::vector<std::uint8_t> out;
    if (packed) {
        unsigned char hdr[8];
        is.read(reinterpret_cast<char*>(hdr), 8);
        if (!is) throw std::runtime_error("truncated prediction stream: " + path);
        std::uint64_t count = 0;
        for (int i = 7; i >= 0; --i) count = (count << 8) | hdr[i];
        out.resize(count);
        std::size_t i = 0;
        int byte = 0;
        while (i < count) {
            byte = is.get();
            if (byte == EOF) throw std::runtime_error("truncated prediction stream: " + path);
            for (int b = 0; b < 8 && i < count; ++b, ++i)
                out[i] = (byte >> b) & 1;
        }
    } else {
        std::string line;
        while (std::getline(is, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line == "0")
                out.push_back(0);
            else if (line == "1")
                out.push_back(1);
            else
                throw std::runtime_error("bad prediction line '" + line + "' in " + path);
        }
    }
    return out;
}

void write_prediction_stream(const std::string& path,
                             const std::vector<std::uint8_t>& bits) {
    const bool packed =
        path.size() >= 5 && path.compare(path.size() - 5, 5, ".bits") == 0;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write prediction stream: " + path);
    if (packed) {
        const std::uint64_t count = bits.size();
        char hdr[8];
        for (int i = 0; i < 8; ++i) hdr[i] = static_cast<char>((count >> (8 * i)) & 0xff);
        os.write(hdr, 8);
        std::uint8_t acc = 0;
        int nb = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            acc |= static_cast<std::uint8_t>((bits[i] & 1) << nb);
            if (++nb == 8) {
                os.put(static_cast<char>(acc));
                acc = 0;
                nb = 0;
            }
        }
        if (nb > 0) os.put(static_cast<char>(acc));
    } else {
        for (auto b : bits) os << (b ? "1\n" : "0\n");
    }
    if (!os) throw std::runtime_error("short write: " + path);
}

}  // namespace asc
