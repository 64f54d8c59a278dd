#pragma once

// Time-major trajectory storage plus the on-disk container. Ground-truth
// edge labels are stored densely for fully connected (analytic) systems;
// periodic cutoff systems recompute labels from positions on demand, which
// is exact because labels are pure functions of the stored state.

#include "pairlearn/laws.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pairlearn::sim {

enum class UnitsKind { Dimensionless, AngstromPsDalton };

struct Trajectory {
    LawSpec law;
    int d = 0;
    int n = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double box_length = 0.0; // > 0: periodic box, positions wrapped into [0, box)
    UnitsKind units = UnitsKind::Dimensionless;

    std::vector<double> masses;  // n
    std::vector<double> charges; // n

    // All time-major: [t][particle][component].
    std::vector<double> positions;
    std::vector<double> velocities;
    std::vector<double> accelerations;

    // Full-graph labels, [t][edge][component] / [t][edge]; empty when labels
    // are recomputed on demand (periodic cutoff systems).
    std::vector<double> edge_forces;
    std::vector<double> edge_potentials;

    int steps() const
    {
        return n > 0 ? static_cast<int>(positions.size() / (static_cast<std::size_t>(n) * d)) : 0;
    }
    int full_edge_count() const { return n * (n - 1); }
    bool has_stored_labels() const { return !edge_potentials.empty(); }
    bool periodic() const { return box_length > 0.0; }

    std::span<const double> pos(int t) const
    {
        return { positions.data() + idx(t), static_cast<std::size_t>(n) * d };
    }
    std::span<const double> vel(int t) const
    {
        return { velocities.data() + idx(t), static_cast<std::size_t>(n) * d };
    }
    std::span<const double> acc(int t) const
    {
        return { accelerations.data() + idx(t), static_cast<std::size_t>(n) * d };
    }

    // Directed edges of the fully connected graph, ordered by receiver then
    // sender: e = i*(n-1) + (j < i ? j : j-1).
    static int full_edge_index(int n, int i, int j)
    {
        return i * (n - 1) + (j < i ? j : j - 1);
    }

    // Ground-truth force on i from j / potential incurred by j on i at step
    // t. Reads stored labels when present, else evaluates the law.
    void edge_force(int t, int i, int j, double* f_out) const;
    double edge_potential(int t, int i, int j) const;

private:
    std::size_t idx(int t) const { return static_cast<std::size_t>(t) * n * d; }
};

// Binary container (versioned magic, JSON header, raw little-endian doubles).
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

// One JSON object per time step, for debugging / external tooling.
void export_trajectory_jsonl(const Trajectory& traj, const std::string& path);

} // namespace pairlearn::sim
