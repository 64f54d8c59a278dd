#pragma once

// Internal molecular-dynamics units are (angstrom, picosecond, dalton); the
// derived energy unit is dalton*A^2/ps^2. Conversions are built from CODATA
// base constants so they can be cross-checked independently in tests.

namespace pairlearn::sim::units {

// Base constants (SI).
inline constexpr double dalton_kg = 1.66053906660e-27;
inline constexpr double electron_volt_J = 1.602176634e-19; // exact
inline constexpr double boltzmann_J_per_K = 1.380649e-23;  // exact
inline constexpr double avogadro = 6.02214076e23;          // exact

// 1 dalton*A^2/ps^2 expressed in joules: dalton_kg * (1e-10 m)^2 / (1e-12 s)^2.
inline constexpr double internal_energy_J = dalton_kg * 1e-20 / 1e-24;

inline constexpr double internal_energy_meV = internal_energy_J / electron_volt_J * 1e3;
inline constexpr double kcal_per_mol_J = 4184.0 / avogadro;
inline constexpr double kcal_per_mol_internal = kcal_per_mol_J / internal_energy_J;
inline constexpr double kcal_per_mol_meV = kcal_per_mol_J / electron_volt_J * 1e3;

// Boltzmann constant in internal energy units per kelvin.
inline constexpr double kB_internal = boltzmann_J_per_K / internal_energy_J;

struct UnitSystem {
    // Energies: internal <-> meV.
    static constexpr double to_meV(double internal) { return internal * internal_energy_meV; }
    static constexpr double from_meV(double mev) { return mev / internal_energy_meV; }
    // Forces: internal (dalton*A/ps^2) <-> meV/A.
    static constexpr double to_meV_per_A(double internal) { return internal * internal_energy_meV; }
    static constexpr double from_meV_per_A(double f) { return f / internal_energy_meV; }
};

} // namespace pairlearn::sim::units
