#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "asc/signal.hpp"

namespace asc {

constexpr bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Radix-2 transforms. Forward is unnormalized (exp(-i 2pi kn/N)); the
// inverse applies 1/N, so idft(dft(v)) == v.
// Size must equal the input length and be a power of two.
std::vector<cplx> dft(const std::vector<cplx>& values, std::size_t size);
std::vector<cplx> idft(const std::vector<cplx>& values, std::size_t size);

// In-place variants used on hot paths; length must be a power of two.
void dft_inplace(std::span<cplx> values);
void idft_inplace(std::span<cplx> values);

}  // namespace asc
