#pragma once

#include <span>
#include <vector>

#include "asc/filterbank.hpp"
#include "asc/fir.hpp"
#include "asc/signal.hpp"

namespace asc {

// Tunables of the delayless subband adaptive filter.
struct SafConfig {
    int fullband_len = 512;  // N, taps of the stacked filter
    int subbands = 64;       // M
    double mu = 0.03;        // step size
    double alpha = 1e-6;     // NLMS regularizer
    PrototypeFilter prototype;  // empty -> design_prototype(256, subbands)

    int decimation() const { return subbands / 2; }           // D = M/2
    int subband_len() const { return fullband_len / decimation(); }
    int retained_bands() const { return subbands / 2 + 1; }

    // Throws std::invalid_argument on any violated constraint.
    void validate() const;
    // Returns a copy with the default prototype filled in when empty.
    SafConfig resolved() const;
};

// Per-band complex weight vectors w_k, k = 0..M/2, each of length N/D.
struct SubbandWeights {
    std::vector<std::vector<cplx>> bands;

    static SubbandWeights zeros(const SafConfig& cfg);
};

struct FullbandFilter {
    std::vector<double> taps;
};

// One NLMS step:  w + mu * conj(x_block) * e / (alpha + ||x_block||^2).
// The conjugate is applied to the input block, not the error.
std::vector<cplx> nlms_update(std::span<const cplx> weights,
                              std::span<const cplx> x_block, cplx e, double mu,
                              double alpha);
void nlms_update_inplace(std::span<cplx> weights, std::span<const cplx> x_block,
                         cplx e, double mu, double alpha);

// Assembles the N-tap fullband filter from the subband weights:
//  1. each weight vector goes through an (N/D)-point DFT;
//  2. fullband bin f in [0, N/2) is read from band k = round(f*M/N) at that
//     band's bin (f - k*N/M) mod (N/D);
//  3. the upper half is the conjugate-reversed lower half, bin N/2 is zero,
//     and the DC bin keeps its real part only, so the spectrum is exactly
//     Hermitian;
//  4. an N-point inverse DFT yields the taps (imaginary residue discarded).
FullbandFilter stack_fullband(const SubbandWeights& weights, const SafConfig& cfg);
// As above, also reporting max |imag| of the inverse transform.
FullbandFilter stack_fullband(const SubbandWeights& weights, const SafConfig& cfg,
                              double& imag_residue);

// Feed-forward filtered-x loop of the simulator.  Processes one stream
// sequentially; owns all delay lines and filter-bank state.
class AscEngine {
  public:
    AscEngine(const SafConfig& cfg, const PathModel& secondary_estimate);

    struct StepResult {
        double y;  // anti-noise sample
        double e;  // residual at the error microphone
    };

    // Advance one sample: x is the reference pickup, d the disturbance at
    // the error microphone.  Throws engine_fault on non-finite values.
    StepResult step(double x, double d);

    // Opens (true) or closes (false) adaptation; filtering continues and all
    // delay lines keep advancing either way.
    void set_gate(bool open) { gate_ = open; }
    bool gate() const { return gate_; }

    const FullbandFilter& fullband() const { return fullband_; }
    const SubbandWeights& weights() const { return weights_; }
    long long samples_processed() const { return n_; }
    double gate_duty() const {
        return n_ == 0 ? 0.0 : static_cast<double>(gated_) / n_;
    }

  private:
    void update_weights();

    SafConfig cfg_;
    std::vector<double> s_hat_;
    SubbandWeights weights_;
    FullbandFilter fullband_;
    DelayLine x_line_;
    DelayLine y_line_;
    AnalysisFilterBank bank_x_;
    AnalysisFilterBank bank_e_;
    // per-band regression blocks, newest-first rings (flattened, 2*Q each)
    std::vector<cplx> block_buf_;
    std::size_t block_pos_;
    // scratch reused by the per-frame stack
    std::vector<cplx> band_spec_;
    std::vector<cplx> full_spec_;
    bool gate_ = false;
    long long n_ = 0;
    long long gated_ = 0;
};

}  // namespace asc
