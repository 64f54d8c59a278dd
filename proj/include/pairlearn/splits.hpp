#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace pairlearn::data {

struct SplitSpec {
    std::array<double, 3> ratios{ 0.7, 0.15, 0.15 };
    std::uint64_t seed = 0;
    std::vector<int> train, valid, test; // disjoint, sorted, covering 0..T-1
};

// Uniformly random disjoint split of {0..T-1}, deterministic per seed.
// Requires T >= 10 and ratios summing to 1.
SplitSpec split_timesteps(int T, std::array<double, 3> ratios, std::uint64_t seed);

} // namespace pairlearn::data
