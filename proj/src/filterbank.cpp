#include "asc/filterbank.hpp"

#include <cmath>

#include "asc/fft.hpp"

namespace asc {

namespace {
constexpr double kPi = 3.141592653589793238462643;
}

PrototypeFilter design_prototype(int length, int M) {
    if (M < 1) throw std::invalid_argument("design_prototype: M must be positive");
    if (length < 2 * M)
        throw std::invalid_argument("design_prototype: length must be >= 2*M");
    const double cutoff = 1.0 / (2.0 * M);  // cycles per sample
    const double mid = (length - 1) / 2.0;
    PrototypeFilter p;
    p.taps.resize(length);
    double sum = 0.0;
    for (int i = 0; i < length; ++i) {
        const double t = i - mid;
        const double arg = 2.0 * kPi * cutoff * t;
        const double sinc = (std::abs(arg) < 1e-12) ? 1.0 : std::sin(arg) / arg;
        const double win = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (length - 1));
        p.taps[i] = 2.0 * cutoff * sinc * win;
        sum += p.taps[i];
    }
    for (auto& t : p.taps) t /= sum;  // unity DC gain
    return p;
}

AnalysisFilterBank::AnalysisFilterBank(const PrototypeFilter& proto, int M)
    : M_(M),
      use_fft_(M >= 2 && is_pow2(static_cast<std::size_t>(M))),
      proto_(proto.taps),
      line_(proto.taps.size()),
      fold_(M > 0 ? M : 1, 0.0),
      spec_(M > 0 ? M : 1),
      frame_(M > 0 ? M / 2 + 1 : 1) {
    if (M < 2 || M % 2 != 0)
        throw std::invalid_argument("analysis_filterbank: M must be even and >= 2");
    if (proto_.empty())
        throw std::invalid_argument("analysis_filterbank: empty prototype");
    tap_mod_.resize(proto_.size());
    for (std::size_t i = 0; i < proto_.size(); ++i)
        tap_mod_[i] = static_cast<int>(i % static_cast<std::size_t>(M));
}

bool AnalysisFilterBank::push(double x) {
    line_.push(x);
    ++n_;
    if (n_ % decimation() != 0) return false;
    emit();
    return true;
}

void AnalysisFilterBank::emit() {
    // fold the windowed history by residue of the absolute sample index:
    // fold[r] = sum of proto[i] * x(n - i) over taps with (n - i) mod M == r
    std::fill(fold_.begin(), fold_.end(), 0.0);
    const auto win = line_.window(proto_.size());
    const int n_mod = static_cast<int>(n_ % M_);
    for (std::size_t i = 0; i < proto_.size(); ++i) {
        int r = n_mod - tap_mod_[i];
        if (r < 0) r += M_;
        fold_[static_cast<std::size_t>(r)] += proto_[i] * win[i];
    }
    // band m = sum_r fold[r] * exp(-i 2pi m r / M), which is an M-point DFT
    if (use_fft_) {
        for (int r = 0; r < M_; ++r) spec_[r] = fold_[r];
        dft_inplace(spec_);
        for (int m = 0; m <= M_ / 2; ++m) frame_[m] = spec_[m];
    } else {
        for (int m = 0; m <= M_ / 2; ++m) {
            cplx acc = 0.0;
            for (int r = 0; r < M_; ++r) {
                const double a = -2.0 * kPi * m * r / M_;
                acc += fold_[r] * cplx{std::cos(a), std::sin(a)};
            }
            frame_[m] = acc;
        }
    }
}

void AnalysisFilterBank::reset() {
    line_.reset();
    n_ = -1;
}

std::vector<SubbandFrame> analysis_filterbank(const Signal& input,
                                              const PrototypeFilter& proto,
                                              int M) {
    AnalysisFilterBank bank(proto, M);
    std::vector<SubbandFrame> out;
    out.reserve(input.samples.size() / bank.decimation() + 1);
    for (double x : input.samples) {
        if (bank.push(x)) {
            SubbandFrame f;
            f.values = bank.frame();
            f.subband_count = M;
            f.decimation = bank.decimation();
            out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace asc
