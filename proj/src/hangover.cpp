#include "asc/hangover.hpp"

#include <cmath>
#include <stdexcept>

namespace asc {

void HangoverParams::validate() const {
    if (X < 1 || X % 2 == 0)
        throw std::invalid_argument("hangover: X must be odd and >= 1");
    if (k < X) throw std::invalid_argument("hangover: k must be >= X");
    if (L < 1) throw std::invalid_argument("hangover: L must be >= 1");
}

HangoverFilter::HangoverFilter(const HangoverParams& params) : p_(params) {
    p_.validate();
    buf_.assign(p_.L, 0);
    in_.reserve(p_.L);
}

bool HangoverFilter::can_read() const {
    if (finished_) return true;
    if (first_read_) return in_.size() >= p_.X;
    return pos_ < in_.size();
}

void HangoverFilter::do_read() {
    if (first_read_) {
        first_read_ = false;
        pos_ = p_.X;
    } else {
        ++pos_;
    }
}

std::uint8_t HangoverFilter::win_at(std::size_t i) const {
    std::size_t idx = pos_ - p_.X + i;
    if (idx > p_.L - 1) idx = p_.L - 1;  // exhausted reads repeat the last sample
    return in_[idx];
}

void HangoverFilter::drain(std::vector<std::uint8_t>& out, bool all) {
    // out[j] can still be rewritten by a future onset while j > out_idx - X
    std::size_t limit = 0;
    if (all)
        limit = p_.L;
    else if (out_idx_ >= p_.X)
        limit = out_idx_ - p_.X + 1;
    for (; emitted_ < limit && emitted_ < p_.L; ++emitted_)
        out.push_back(buf_[emitted_]);
}

void HangoverFilter::run(std::vector<std::uint8_t>& out) {
    if (p_.L < p_.X) return;  // passthrough handled in push/finish
    for (;;) {
        if (done_) return;
        if (st_ == St::Read) {
            if (out_idx_ > p_.L - 1) {
                done_ = true;
                drain(out, true);
                return;
            }
            if (!can_read()) return;
            do_read();
            std::size_t ones = 0;
            for (std::size_t i = 0; i < p_.X; ++i) ones += win_at(i);
            if (2 * ones > p_.X) {
                start_idx_ = out_idx_;
                const std::size_t lo =
                    out_idx_ + 1 >= p_.X ? out_idx_ + 1 - p_.X : 0;
                for (std::size_t j = lo; j <= out_idx_; ++j) buf_[j] = 1;
                i_ = 1;
                st_ = St::EventDiscard;
            } else if (out_idx_ == 0) {
                for (std::size_t j = 0; j < p_.X; ++j) buf_[j] = win_at(j);
                out_idx_ = p_.X;
            } else {
                buf_[out_idx_] = win_at(p_.X - 1);
                ++out_idx_;
            }
        } else {
            if (!can_read()) return;
            do_read();  // discarded
            if (i_ <= p_.k - p_.X && start_idx_ + i_ <= p_.L - 1) {
                out_idx_ = start_idx_ + i_;
                buf_[out_idx_] = 1;
                ++i_;
            } else {
                ++out_idx_;
                st_ = St::Read;
            }
        }
        drain(out, false);
    }
}

void HangoverFilter::push(std::uint8_t bit, std::vector<std::uint8_t>& out) {
    if (in_.size() >= p_.L)
        throw std::invalid_argument("hangover: more inputs than L");
    in_.push_back(bit ? 1 : 0);
    if (p_.L < p_.X) {
        out.push_back(bit ? 1 : 0);  // short stream: straight copy
        ++emitted_;
        return;
    }
    run(out);
}

void HangoverFilter::finish(std::vector<std::uint8_t>& out) {
    if (in_.size() != p_.L)
        throw std::invalid_argument("hangover: stream length does not equal L");
    if (finished_) return;
    finished_ = true;
    if (p_.L < p_.X) return;
    run(out);
}

std::vector<std::uint8_t> hangover(const std::vector<std::uint8_t>& predictions,
                                   const HangoverParams& params) {
    HangoverParams p = params;
    p.validate();
    if (predictions.size() != p.L)
        throw std::invalid_argument("hangover: predictions length must equal L");
    HangoverFilter filt(p);
    std::vector<std::uint8_t> out;
    out.reserve(p.L);
    for (auto b : predictions) filt.push(b, out);
    filt.finish(out);
    return out;
}

std::vector<std::uint8_t> gate_stream(const std::vector<std::uint8_t>& bits,
                                      int sample_rate_hz, double hop_ms,
                                      std::size_t total_samples) {
    if (sample_rate_hz <= 0 || hop_ms <= 0)
        throw std::invalid_argument("gate_stream: invalid rate or hop");
    const auto hop = static_cast<std::size_t>(
        std::lround(hop_ms * sample_rate_hz / 1000.0));
    std::vector<std::uint8_t> out(total_samples, 0);
    if (bits.empty() || hop == 0) return out;
    for (std::size_t n = 0; n < total_samples; ++n) {
        std::size_t f = n / hop;
        if (f >= bits.size()) f = bits.size() - 1;
        out[n] = bits[f];
    }
    return out;
}

}  // namespace asc
