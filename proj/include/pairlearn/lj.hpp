#pragma once

// Lennard-Jones argon in a periodic cubic box: minimum-image displacement,
// Maxwell-Boltzmann initialization and an NVE velocity-Verlet run. Internal
// units are angstrom / picosecond / dalton.

#include "pairlearn/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace pairlearn::sim {

struct LjSpec {
    int n_atoms = 258;
    double box_length = 27.27;     // angstrom
    double epsilon_kcal = 0.238;   // kcal/mol
    double sigma = 3.4;            // angstrom
    double cutoff_factor = 3.0;    // cutoff = cutoff_factor * sigma
    double mass = 39.9;            // dalton
    double temperature = 100.0;    // kelvin
    int n_steps = 1000;
    int n_runs = 10;
    double dt = 0.002;             // ps; validated by the energy-drift bound

    double cutoff() const { return cutoff_factor * sigma; }
    double epsilon_internal() const; // dalton*A^2/ps^2
    void validate() const;           // cutoff < box/2, positive constants
};

// Wraps each component of disp into (-box/2, box/2].
void wrap_displacement(double* disp, double box, int d);

// Minimum-image displacement r_j - r_i for coordinates in [0, box).
void minimum_image(const double* r_i, const double* r_j, double box, int d, double* disp_out);

// Velocity components ~ N(0, kB*T/m) with the net momentum removed.
std::vector<double> maxwell_boltzmann_velocities(double temperature,
                                                 const std::vector<double>& masses, int d,
                                                 std::uint64_t seed);

Trajectory simulate_lj(const LjSpec& spec, std::uint64_t seed);

// Diagnostics for conservation tests: total energy uses the same truncated
// pair potential as the simulation.
double lj_total_energy(const Trajectory& traj, int t);

} // namespace pairlearn::sim
