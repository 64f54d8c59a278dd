#pragma once

// Renders the learned interaction field around a fixed probe particle: the
// sender particle moves over a 2D grid, the probe sits at the origin, and
// the model's claimed pairwise force (and potential, for scalar-message
// models) is compared against the analytic law.

#include "pairlearn/laws.hpp"
#include "pairlearn/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pairlearn::metrics {

struct GridSpec {
    double xmin = -3.0, xmax = 3.0;
    double ymin = -3.0, ymax = 3.0;
    int nx = 41, ny = 41;
    // Probe (receiver) particle.
    double probe_mass = 1.0;
    double probe_charge = 0.0;
    // Moving (sender) particle.
    double sender_mass = 1.0;
    double sender_charge = 0.0;
    // Cells closer to the probe than this radius are skipped with a marker.
    double skip_radius = 0.01;
};

struct FieldGrid {
    GridSpec spec;
    bool has_potential = false;
    std::vector<double> pred_force;  // [cell][2]
    std::vector<double> true_force;  // [cell][2]
    std::vector<double> pred_pot;    // [cell], scalar-message models
    std::vector<double> true_pot;    // [cell]
    std::vector<double> mag_err;     // | |F_hat| - |F| |
    std::vector<double> angle_err;   // radians, in [0, pi]
    std::vector<std::uint8_t> skipped;

    int cells() const { return spec.nx * spec.ny; }
};

// Requires a 2D, non-periodic feature layout.
FieldGrid render_field(const model::Model& m, const sim::LawSpec& truth_law,
                       const GridSpec& spec);

void save_field_csv(const FieldGrid& grid, const std::string& path);

// atan2-based angle between two 2D vectors, in [0, pi].
double angle_between_2d(const double* a, const double* b);

} // namespace pairlearn::metrics
