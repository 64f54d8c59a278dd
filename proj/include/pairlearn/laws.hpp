#pragma once

// Analytic pairwise interaction laws. F_ij is the force on particle i from
// particle j, with n_ij the unit vector pointing from i to j. Charge and
// Orbital soften every distance in denominators and logarithms by delta.

#include <array>
#include <string>
#include <string_view>

namespace pairlearn::sim {

enum class LawKind { Spring, Charge, Orbital, Discontinuous, LennardJones };

struct LawSpec {
    LawKind kind = LawKind::Spring;
    double k = 2.0;
    double L = 1.0;
    double c = 1.0;
    double delta = 0.01;
    double theta = 2.0;
    // Lennard-Jones, in whatever units the caller works in.
    double lj_epsilon = 0.0;
    double lj_sigma = 0.0;
    double lj_cutoff = 0.0;

    static LawSpec spring(double k = 2.0, double L = 1.0);
    static LawSpec charge(double c = 1.0, double delta = 0.01);
    static LawSpec orbital(double delta = 0.01);
    static LawSpec discontinuous(double theta = 2.0);
    static LawSpec lennard_jones(double epsilon, double sigma, double cutoff);

    bool needs_charge() const { return kind == LawKind::Charge; }
};

struct ParticleState {
    std::array<double, 3> r{};
    std::array<double, 3> v{};
    double m = 1.0;
    double q = 0.0;
};

// Force on i from j given the displacement disp = r_j - r_i (minimum-imaged
// by the caller when periodic). Throws SingularityError for configurations
// the law cannot evaluate (coincident particles, or zero denominator when
// delta == 0).
void law_force(const LawSpec& law, const double* disp, double q_i, double q_j, double m_i,
               double m_j, int d, double* f_out);

double law_potential(const LawSpec& law, const double* disp, double q_i, double q_j, double m_i,
                     double m_j, int d);

// Convenience wrappers over particle states (non-periodic).
void pairwise_force(const LawSpec& law, const ParticleState& pi, const ParticleState& pj, int d,
                    double* f_out);
double pairwise_potential(const LawSpec& law, const ParticleState& pi, const ParticleState& pj,
                          int d);

// (V(r), -dV/dr) for the truncated Lennard-Jones pair interaction; both are
// identically zero at and beyond the cutoff.
struct LjPair {
    double potential;
    double force_magnitude;
};
LjPair lj_pair(double r, double epsilon, double sigma, double cutoff);

std::string_view law_name(LawKind kind);
LawKind law_from_name(const std::string& name); // throws ConfigError

} // namespace pairlearn::sim
