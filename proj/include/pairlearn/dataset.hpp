#pragma once

// A dataset binds a trajectory to a topology, feature layout, split and an
// optional noise corruption. Snapshots are built on demand; features come
// from the (possibly noisy) kinematics, training targets from the noisy
// accelerations, evaluation targets and labels always from the clean ones.

#include "pairlearn/graph.hpp"
#include "pairlearn/noise.hpp"
#include "pairlearn/splits.hpp"
#include "pairlearn/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace pairlearn::data {

struct Dataset {
    sim::Trajectory trajectory;
    Topology topology;
    FeatureLayout layout;
    SplitSpec split;
    double beta = 0.0;
    std::uint64_t noise_seed = 0;
    NoisyKinematics noisy; // populated when beta > 0

    int steps() const { return trajectory.steps(); }
    bool is_noisy() const { return beta > 0.0; }

    // Feature source arrays (noisy when beta > 0).
    std::span<const double> feature_positions(int t) const;
    std::span<const double> feature_velocities(int t) const;
    std::span<const double> training_acc(int t) const;

    // Snapshot with training targets (noisy accelerations when beta > 0).
    GraphSnapshot snapshot(int t) const;
    // Snapshot with clean ground-truth accelerations as targets.
    GraphSnapshot eval_snapshot(int t) const;

    // Train steps; when beta > 0 the first and last step are dropped since
    // their one-sided stencils are lower order.
    std::vector<int> train_steps() const;

    // Dataset-level noise statistic (0 when beta == 0).
    double measured_noise_level() const;
};

Dataset make_dataset(sim::Trajectory trajectory, Topology topology,
                     std::array<double, 3> split_ratios, std::uint64_t split_seed, double beta,
                     std::uint64_t noise_seed);

// Layout implied by the trajectory: charge feature for analytic systems,
// displacement feature for periodic cutoff systems.
FeatureLayout layout_for(const sim::Trajectory& traj, const Topology& topology);

} // namespace pairlearn::data
