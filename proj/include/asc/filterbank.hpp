#pragma once

#include <vector>

#include "asc/fir.hpp"
#include "asc/signal.hpp"

namespace asc {

// Lowpass prototype for the DFT-modulated analysis bank.
struct PrototypeFilter {
    std::vector<double> taps;

    std::size_t length() const { return taps.size(); }
};

// Hamming-windowed sinc, cutoff at 1/(2M) normalized frequency, DC gain
// normalized to exactly 1.  Requires length >= 2*M.
PrototypeFilter design_prototype(int length, int M);

// Complex subband samples for one decimated instant.  Only bands 0..M/2 are
// kept; for real input band m and band M-m are complex conjugates, so the
// upper half carries no extra information.
struct SubbandFrame {
    std::vector<cplx> values;  // M/2 + 1 entries
    int subband_count = 0;     // M
    int decimation = 0;        // D = M/2
};

// Streaming M-band analysis bank, decimation D = M/2.  Band m at decimated
// index j is sum_i proto[i] * x(jD - i) * exp(-i 2pi m (jD - i) / M); a frame
// is emitted at samples 0, D, 2D, ...  One instance per signal being split.
class AnalysisFilterBank {
  public:
    AnalysisFilterBank(const PrototypeFilter& proto, int M);

    // Returns true when this push produced a frame (then read via frame()).
    bool push(double x);
    const std::vector<cplx>& frame() const { return frame_; }

    int bands() const { return M_; }
    int decimation() const { return M_ / 2; }
    void reset();

  private:
    void emit();

    int M_;
    bool use_fft_;
    std::vector<double> proto_;
    std::vector<int> tap_mod_;  // i mod M per prototype tap
    DelayLine line_;
    long long n_ = -1;  // absolute index of newest sample
    std::vector<double> fold_;
    std::vector<cplx> spec_;
    std::vector<cplx> frame_;
};

// Whole-signal convenience wrapper: one SubbandFrame per D input samples.
std::vector<SubbandFrame> analysis_filterbank(const Signal& input,
                                              const PrototypeFilter& proto,
                                              int M);

}  // namespace asc
