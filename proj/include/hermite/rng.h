#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hermite {

using Engine = std::mt19937_64;

/// Deterministic engine for substream `index` of the labeled stream under
/// `root_seed`. Distinct (label, index) pairs give statistically independent
/// streams, so Monte Carlo output does not depend on evaluation order.
Engine substream(std::uint64_t root_seed, std::string_view label, std::uint64_t index = 0);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hermite
