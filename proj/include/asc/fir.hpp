#pragma once

#include <span>
#include <vector>

#include "asc/signal.hpp"

namespace asc {

// Direct-form FIR convolution with zero pre-signal history.
// Output has the same length and sample rate as the input.
Signal fir_filter(const Signal& input, const PathModel& path);

// Sliding sample history kept contiguous (double-write ring) so that
// window()[i] == x(n - i) without any per-sample copying.
class DelayLine {
  public:
    explicit DelayLine(std::size_t length);

    void push(double x);
    // newest-first view of the most recent `len` samples (len <= length())
    std::span<const double> window(std::size_t len) const {
        return {buf_.data() + pos_, len};
    }
    std::size_t length() const { return len_; }
    void reset();

  private:
    std::size_t len_;
    std::size_t pos_;
    std::vector<double> buf_;
};

// eight independent accumulator chains so the FP adds pipeline and
// vectorize; fixed summation order keeps results reproducible run to run
inline double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    const double* __restrict pa = a.data();
    const double* __restrict pb = b.data();
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double c4 = 0.0, c5 = 0.0, c6 = 0.0, c7 = 0.0;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        c0 += pa[i] * pb[i];
        c1 += pa[i + 1] * pb[i + 1];
        c2 += pa[i + 2] * pb[i + 2];
        c3 += pa[i + 3] * pb[i + 3];
        c4 += pa[i + 4] * pb[i + 4];
        c5 += pa[i + 5] * pb[i + 5];
        c6 += pa[i + 6] * pb[i + 6];
        c7 += pa[i + 7] * pb[i + 7];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += pa[i] * pb[i];
    return (((c0 + c1) + (c2 + c3)) + ((c4 + c5) + (c6 + c7))) + tail;
}

}  // namespace asc
