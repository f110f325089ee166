#pragma once

#include <array>
#include <cstdint>

namespace csrt {

struct Seed {
    std::uint64_t value = 0;
};

/// SplitMix64 step. Used to expand a 64-bit seed into generator state and
/// to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives a child seed from a parent and a stream index, so that
/// per-pair / per-site randomness does not depend on iteration order.
Seed derive_seed(Seed parent, std::uint64_t stream);

/// xoshiro256** 1.0, state filled by four SplitMix64 draws from the seed.
///
/// Derived distributions (all part of the reproducibility contract):
///  - uniform01: top 53 bits of next() times 2^-53, in [0, 1).
///  - below(n): Lemire multiply-shift with rejection, unbiased in [0, n).
///  - normal: Box-Muller on (1 - uniform01(), uniform01()), cosine branch
///    only; one normal consumes two draws.
///  - student_t(df): normal / sqrt(sum of df squared normals / df), integer df.
class Rng {
public:
    explicit Rng(Seed seed);

    std::uint64_t next();
    double uniform01();
    std::uint64_t below(std::uint64_t n);
    double normal();
    double student_t(int df);

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace csrt
