#pragma once

#include <cstdint>
#include <vector>

namespace asc {

struct HangoverParams {
    std::size_t L = 60001;  // predictions per stream
    std::size_t k = 100;    // forced ones per detected snore onset
    std::size_t X = 3;      // majority-vote window, odd

    void validate() const;  // X odd and >= 1, k >= X, L >= 1
};

// Post-processes a binary prediction stream: a ones-majority window of size X
// marks a snore onset; the window positions and the next k-X outputs are
// forced to one (k total) while input reads are discarded.  Zeros-majority
// windows pass samples through (the very first window is copied wholesale).
// Streams shorter than X are copied unchanged.  Output length equals L.
std::vector<std::uint8_t> hangover(const std::vector<std::uint8_t>& predictions,
                                   const HangoverParams& params);

// Incremental variant producing output identical to the batch function with
// a latency of X frames.  Feed all L bits through push(), then finish().
class HangoverFilter {
  public:
    explicit HangoverFilter(const HangoverParams& params);

    // Feed one prediction; appends any newly finalized outputs to `out`.
    void push(std::uint8_t bit, std::vector<std::uint8_t>& out);
    // Input complete; flushes the remaining outputs.
    void finish(std::vector<std::uint8_t>& out);

  private:
    bool can_read() const;
    void do_read();
    std::uint8_t win_at(std::size_t i) const;
    void run(std::vector<std::uint8_t>& out);
    void drain(std::vector<std::uint8_t>& out, bool all);

    enum class St { Read, EventDiscard };

    HangoverParams p_;
    std::vector<std::uint8_t> in_;
    std::vector<std::uint8_t> buf_;   // full output buffer
    std::size_t pos_ = 0;             // input consumed mark; window ends here
    bool first_read_ = true;
    bool finished_ = false;
    St st_ = St::Read;
    std::size_t out_idx_ = 0;
    std::size_t start_idx_ = 0;
    std::size_t i_ = 0;
    std::size_t emitted_ = 0;
    bool done_ = false;
};

// Zero-order hold of per-frame bits onto the sample grid: each bit covers
// hop_ms worth of samples; samples beyond the last frame hold the last bit
// (zeros when the stream is empty).
std::vector<std::uint8_t> gate_stream(const std::vector<std::uint8_t>& bits,
                                      int sample_rate_hz, double hop_ms,
                                      std::size_t total_samples);

}  // namespace asc
