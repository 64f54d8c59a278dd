#include "pairlearn/dataset.hpp"

#include "pairlearn/errors.hpp"

#include <algorithm>

namespace pairlearn::data {

namespace {

std::span<const double> frame(const std::vector<double>& arr, int t, int per_step)
{
    return { arr.data() + static_cast<std::size_t>(t) * per_step,
             static_cast<std::size_t>(per_step) };
}

} // namespace

std::span<const double> Dataset::feature_positions(int t) const
{
    const int per_step = trajectory.n * trajectory.d;
    return is_noisy() ? frame(noisy.positions, t, per_step) : frame(trajectory.positions, t, per_step);
}

std::span<const double> Dataset::feature_velocities(int t) const
{
    const int per_step = trajectory.n * trajectory.d;
    return is_noisy() ? frame(noisy.velocities, t, per_step)
                      : frame(trajectory.velocities, t, per_step);
}

std::span<const double> Dataset::training_acc(int t) const
{
    const int per_step = trajectory.n * trajectory.d;
    return is_noisy() ? frame(noisy.accelerations, t, per_step)
                      : frame(trajectory.accelerations, t, per_step);
}

GraphSnapshot Dataset::snapshot(int t) const
{
    if (t < 0 || t >= steps())
        throw DataError("snapshot: step out of range");
    return build_snapshot(feature_positions(t), feature_velocities(t), training_acc(t),
                          trajectory.masses, trajectory.charges, trajectory.n, trajectory.d,
                          layout, topology);
}

GraphSnapshot Dataset::eval_snapshot(int t) const
{
    if (t < 0 || t >= steps())
        throw DataError("eval_snapshot: step out of range");
    return build_snapshot(feature_positions(t), feature_velocities(t), trajectory.acc(t),
                          trajectory.masses, trajectory.charges, trajectory.n, trajectory.d,
                          layout, topology);
}

std::vector<int> Dataset::train_steps() const
{
    if (!is_noisy())
        return split.train;
    std::vector<int> steps;
    steps.reserve(split.train.size());
    const int last = this->steps() - 1;
    for (int t : split.train)
        if (t != 0 && t != last)
            steps.push_back(t);
    return steps;
}

double Dataset::measured_noise_level() const
{
    if (!is_noisy())
        return 0.0;
    return noise_level(trajectory.accelerations, noisy.accelerations);
}

FeatureLayout layout_for(const sim::Trajectory& traj, const Topology& topology)
{
    FeatureLayout layout;
    layout.d = traj.d;
    layout.has_charge = !traj.periodic();
    layout.has_disp = topology.kind == Topology::Kind::Cutoff;
    return layout;
}

Dataset make_dataset(sim::Trajectory trajectory, Topology topology,
                     std::array<double, 3> split_ratios, std::uint64_t split_seed, double beta,
                     std::uint64_t noise_seed)
{
    Dataset ds;
    ds.layout = layout_for(trajectory, topology);
    ds.trajectory = std::move(trajectory);
    ds.topology = topology;
    ds.split = split_timesteps(ds.trajectory.steps(), split_ratios, split_seed);
    ds.beta = beta;
    ds.noise_seed = noise_seed;
    if (beta > 0.0)
        ds.noisy = corrupt_positions(ds.trajectory, beta, noise_seed);
    return ds;
}

} // namespace pairlearn::data
