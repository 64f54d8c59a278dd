#pragma once

// Measurement-noise pipeline: white noise on positions, kinematics
// recomputed from the noisy positions by finite differences, and the
// noise-level statistic (mean relative change of the acceleration target).

#include "pairlearn/trajectory.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pairlearn::data {

// Central differences at interior steps. Endpoints use second-order
// one-sided stencils:
//   v_0 = (-3 r_0 + 4 r_1 - r_2) / (2 dt),  a_0 = (r_0 - 2 r_1 + r_2) / dt^2
// (mirrored at the last step). Requires at least 3 steps.
void finite_difference_kinematics(std::span<const double> positions, int T, int per_step,
                                  double dt, std::vector<double>& velocities,
                                  std::vector<double>& accelerations);

struct NoisyKinematics {
    double beta = 0.0;
    std::vector<double> positions;     // r + beta * N(0,1)
    std::vector<double> velocities;    // finite differences of noisy positions
    std::vector<double> accelerations; // second differences of noisy positions
};

// beta == 0 returns the trajectory arrays unchanged (no finite differences).
NoisyKinematics corrupt_positions(const sim::Trajectory& traj, double beta, std::uint64_t seed);

// Mean over all (t, i, k) of |noisy - clean| / |clean|, skipping components
// whose clean value is exactly zero. Throws if every component is zero.
double noise_level(std::span<const double> clean_acc, std::span<const double> noisy_acc);

} // namespace pairlearn::data
