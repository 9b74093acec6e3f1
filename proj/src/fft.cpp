#include "asc/fft.hpp"

#include <array>
#include <cmath>

namespace asc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// half-size twiddle table exp(-i 2pi k / n), k = 0..n/2-1, cached per size
// (indexed by log2 n; transforms beyond 2^31 are not a use case here)
const std::vector<cplx>& twiddles(std::size_t n) {
    thread_local std::array<std::vector<cplx>, 32> cache;
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    auto& tw = cache[log2n];
    if (tw.empty() && n >= 2) {
        tw.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
            tw[k] = {std::cos(a), std::sin(a)};
        }
    }
    return tw;
}

void transform(std::span<cplx> v, bool inverse) {
    const std::size_t n = v.size();
    if (n <= 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }

    // explicit real/imag butterflies; finite inputs only on this path
    const auto& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx w = tw[k * step];
                const double wr = w.real();
                const double wi = inverse ? -w.imag() : w.imag();
                const cplx u = v[i + k];
                const cplx q = v[i + k + len / 2];
                const double tr = q.real() * wr - q.imag() * wi;
                const double ti = q.real() * wi + q.imag() * wr;
                v[i + k] = {u.real() + tr, u.imag() + ti};
                v[i + k + len / 2] = {u.real() - tr, u.imag() - ti};
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& x : v) x *= scale;
    }
}

void check_size(const std::vector<cplx>& values, std::size_t size) {
    if (size == 0 || !is_pow2(size))
        throw std::invalid_argument("dft: size must be a power of two, got " +
                                    std::to_string(size));
    if (values.size() != size)
        throw std::invalid_argument("dft: size must equal input length");
}

}  // namespace

std::vector<cplx> dft(const std::vector<cplx>& values, std::size_t size) {
    check_size(values, size);
    std::vector<cplx> out = values;
    transform(out, false);
    return out;
}

std::vector<cplx> idft(const std::vector<cplx>& values, std::size_t size) {
    check_size(values, size);
    std::vector<cplx> out = values;
    transform(out, true);
    return out;
}

void dft_inplace(std::span<cplx> values) { transform(values, false); }
void idft_inplace(std::span<cplx> values) { transform(values, true); }

}  // namespace asc
