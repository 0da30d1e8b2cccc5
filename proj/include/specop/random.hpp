#pragma once

// Seeded random draws. Every consumer derives its own substream from a master
// seed so results never depend on scheduling.

#include "specop/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace specop {

using Rng = std::mt19937_64;

/// splitmix64-based derivation of an independent stream seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                        std::uint64_t b = 0) noexcept;
[[nodiscard]] Rng make_rng(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0);

[[nodiscard]] double standard_normal(Rng& rng);
[[nodiscard]] double uniform(Rng& rng, double lo, double hi);
[[nodiscard]] Index uniform_index(Rng& rng, Index lo, Index hi);  // inclusive

[[nodiscard]] Matrix gaussian_matrix(Rng& rng, Index rows, Index cols);
[[nodiscard]] Matrix gaussian_symmetric(Rng& rng, Index m);
/// Haar-distributed orthogonal matrix (QR with sign fix).
[[nodiscard]] Matrix random_orthogonal(Rng& rng, Index m);
[[nodiscard]] std::vector<Index> random_permutation(Rng& rng, Index m);

}  // namespace specop
