#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "asc/features.hpp"

namespace asc {

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t count() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

// Serialized parameters of the snore classifier plus the front-end constants
// any weight producer must match.  Layout:
//   conv{1,2,3}.kernel [3,3,in,32], .bias [32], .bn.{gamma,beta,mean,variance} [32]
//   gru{1,2}.{wz,wr,wc} [in,32], .{uz,ur,uc} [32,32], .{bz,br,bc} [32]
//   out.kernel [32,1], out.bias [1]
struct CrnnWeights {
    std::uint32_t n_mels = 40;
    std::uint32_t win_ms = 30;
    std::uint32_t hop_ms = 10;
    std::string mel_variant = "slaney";
    float leaky_slope = 0.3f;
    std::map<std::string, Tensor> layers;

    // Checks the full dimension chain; throws naming the offending layer.
    void validate() const;

    static CrnnWeights zeros();
    static CrnnWeights random(std::uint64_t seed, double scale = 0.3);
};

// "SADW" container, version 1, little-endian throughout.
CrnnWeights load_weights(const std::string& path);
void save_weights(const std::string& path, const CrnnWeights& weights);

// Per-frame snore probability.  Conv blocks use same-padding 3x3 kernels,
// inference-mode batch norm, Leaky ReLU, and max pooling (5,1)/(4,1)/(2,1)
// over the Mel axis; two 32-unit GRUs run in time order from zero state
// (hard-sigmoid gates, tanh candidate, reset applied to the recurrent term);
// a per-frame dense layer with sigmoid produces the output.
std::vector<double> crnn_forward(const MelFeatureMatrix& features,
                                 const CrnnWeights& weights);

}  // namespace asc
