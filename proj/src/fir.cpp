#include "asc/fir.hpp"

#include <cmath>

namespace asc {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": non-finite value");
}

Signal fir_filter(const Signal& input, const PathModel& path) {
    if (path.taps.empty())
        throw std::invalid_argument("fir_filter: empty tap set");
    const auto& x = input.samples;
    const auto& h = path.taps;
    Signal out;
    out.sample_rate_hz = input.sample_rate_hz;
    out.samples.assign(x.size(), 0.0);
    DelayLine line(h.size());
    const std::span<const double> taps{h.data(), h.size()};
    for (std::size_t n = 0; n < x.size(); ++n) {
        line.push(x[n]);
        out.samples[n] = dot(taps, line.window(h.size()));
    }
    return out;
}

DelayLine::DelayLine(std::size_t length)
    : len_(length), pos_(length == 0 ? 0 : length - 1), buf_(2 * length, 0.0) {}

void DelayLine::push(double x) {
    pos_ = (pos_ == 0) ? len_ - 1 : pos_ - 1;
    buf_[pos_] = x;
    buf_[pos_ + len_] = x;
}

void DelayLine::reset() {
    std::fill(buf_.begin(), buf_.end(), 0.0);
    pos_ = len_ == 0 ? 0 : len_ - 1;
}

}  // namespace asc
