#pragma once

#include <cstdint>

namespace asc {

// xoshiro256** with splitmix64 seeding.  Self-contained so that seeded
// experiment output is identical on every platform and toolchain.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    // uniform in [lo, hi)
    double uniform(double lo, double hi);
    // integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    // standard normal, Box-Muller
    double normal();

    // derive an independent stream (e.g. one per experiment row)
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace asc
