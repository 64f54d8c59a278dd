#include "pairlearn/noise.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/rng.hpp"

#include <cmath>

namespace pairlearn::data {

void finite_difference_kinematics(std::span<const double> positions, int T, int per_step,
                                  double dt, std::vector<double>& velocities,
                                  std::vector<double>& accelerations)
{
    if (T < 3)
        throw DataError("finite_difference_kinematics: need at least 3 time steps");
    if (positions.size() != static_cast<std::size_t>(T) * per_step)
        throw DataError("finite_difference_kinematics: size mismatch");
    velocities.resize(positions.size());
    accelerations.resize(positions.size());
    const auto at = [&](int t, int c) -> double {
        return positions[static_cast<std::size_t>(t) * per_step + c];
    };
    const double inv2dt = 1.0 / (2.0 * dt);
    const double invdt2 = 1.0 / (dt * dt);
    for (int c = 0; c < per_step; ++c) {
        velocities[c] = (-3.0 * at(0, c) + 4.0 * at(1, c) - at(2, c)) * inv2dt;
        accelerations[c] = (at(0, c) - 2.0 * at(1, c) + at(2, c)) * invdt2;
        for (int t = 1; t + 1 < T; ++t) {
            const std::size_t idx = static_cast<std::size_t>(t) * per_step + c;
            velocities[idx] = (at(t + 1, c) - at(t - 1, c)) * inv2dt;
            accelerations[idx] = (at(t + 1, c) - 2.0 * at(t, c) + at(t - 1, c)) * invdt2;
        }
        const std::size_t last = static_cast<std::size_t>(T - 1) * per_step + c;
        velocities[last] = (3.0 * at(T - 1, c) - 4.0 * at(T - 2, c) + at(T - 3, c)) * inv2dt;
        accelerations[last] = (at(T - 1, c) - 2.0 * at(T - 2, c) + at(T - 3, c)) * invdt2;
    }
}

NoisyKinematics corrupt_positions(const sim::Trajectory& traj, double beta, std::uint64_t seed)
{
    if (beta < 0.0)
        throw ConfigError("corrupt_positions: beta must be non-negative");
    NoisyKinematics out;
    out.beta = beta;
    out.positions = traj.positions;
    if (beta == 0.0) {
        out.velocities = traj.velocities;
        out.accelerations = traj.accelerations;
        return out;
    }
    Rng rng(seed);
    for (auto& x : out.positions)
        x += beta * rng.normal();
    finite_difference_kinematics(out.positions, traj.steps(), traj.n * traj.d, traj.dt,
                                 out.velocities, out.accelerations);
    return out;
}

double noise_level(std::span<const double> clean_acc, std::span<const double> noisy_acc)
{
    if (clean_acc.size() != noisy_acc.size())
        throw DataError("noise_level: shape mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < clean_acc.size(); ++i) {
        const double a = clean_acc[i];
        if (a == 0.0)
            continue; // avoid dividing by zero
        sum += std::fabs(noisy_acc[i] - a) / std::fabs(a);
        ++count;
    }
    if (count == 0)
        throw DataError("noise_level: undefined, all clean components are zero");
    return sum / static_cast<double>(count);
}

} // namespace pairlearn::data
