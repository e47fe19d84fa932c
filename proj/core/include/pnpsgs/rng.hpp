#pragma once

#include <cstdint>
#include <span>

namespace pnpsgs {

/// Deterministic random stream (xoshiro256++ with splitmix64 seeding).
///
/// The standard <random> distributions are implementation-defined, which would
/// break the byte-identical-chain reproducibility contract across toolchains.
/// This generator and its Gaussian sampler are fully pinned by this code base.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream derived from (seed, stream index); used for
    /// concurrent chains.
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal draw (Marsaglia polar method, cached spare).
    double normal();

    void fill_normal(std::span<double> out);

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pnpsgs
