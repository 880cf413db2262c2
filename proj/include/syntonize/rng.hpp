#pragma once

#include <cstdint>
#include <random>

namespace syntonize {

/// Every stochastic operation draws from this generator (64-bit Mersenne
/// Twister). The engine's output is fixed by the C++ standard; the
/// distribution adaptors are not, so bit-reproducibility holds per standard
/// library implementation.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

Rng make_rng(std::uint64_t seed);

/// Independent stream for one Monte Carlo replica. The stream depends only on
/// (master, replica, lane), never on scheduling order.
Rng replica_rng(std::uint64_t master, std::uint64_t replica, std::uint64_t lane = 0);

} // namespace syntonize
