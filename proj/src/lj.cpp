#include "pairlearn/lj.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/rng.hpp"
#include "pairlearn/units.hpp"

#include <cmath>
#include <string>

namespace pairlearn::sim {

double LjSpec::epsilon_internal() const
{
    return epsilon_kcal * units::kcal_per_mol_internal;
}

void LjSpec::validate() const
{
    if (n_atoms < 2)
        throw ConfigError("lj: need at least two atoms");
    if (box_length <= 0 || sigma <= 0 || epsilon_kcal <= 0 || mass <= 0 || dt <= 0)
        throw ConfigError("lj: constants must be positive");
    if (temperature <= 0)
        throw ConfigError("lj: temperature must be positive");
    if (!(cutoff() < 0.5 * box_length))
        throw ConfigError("lj: cutoff " + std::to_string(cutoff()) +
                          " violates minimum-image validity (must be < box/2)");
}

void wrap_displacement(double* disp, double box, int d)
{
    for (int k = 0; k < d; ++k) {
        double w = disp[k] - box * std::round(disp[k] / box);
        if (w <= -0.5 * box)
            w += box;
        disp[k] = w;
    }
}

void minimum_image(const double* r_i, const double* r_j, double box, int d, double* disp_out)
{
    for (int k = 0; k < d; ++k)
        disp_out[k] = r_j[k] - r_i[k];
    wrap_displacement(disp_out, box, d);
}

std::vector<double> maxwell_boltzmann_velocities(double temperature,
                                                 const std::vector<double>& masses, int d,
                                                 std::uint64_t seed)
{
    if (temperature <= 0)
        throw ConfigError("maxwell_boltzmann_velocities: temperature must be positive");
    const int n = static_cast<int>(masses.size());
    std::vector<double> vel(static_cast<std::size_t>(n) * d);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const double sd = std::sqrt(units::kB_internal * temperature / masses[i]);
        for (int k = 0; k < d; ++k)
            vel[static_cast<std::size_t>(i) * d + k] = rng.normal(0.0, sd);
    }
    // Remove the net momentum so the box does not drift.
    double total_mass = 0.0;
    double p[3] = { 0, 0, 0 };
    for (int i = 0; i < n; ++i) {
        total_mass += masses[i];
        for (int k = 0; k < d; ++k)
            p[k] += masses[i] * vel[static_cast<std::size_t>(i) * d + k];
    }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            vel[static_cast<std::size_t>(i) * d + k] -= p[k] / total_mass;
    return vel;
}

namespace {

// Atoms on a perturbed cubic lattice; uniform-random placement overlaps at
// this density and blows up immediately.
std::vector<double> lattice_positions(int n, double box, Rng& rng)
{
    int cells = 1;
    while (cells * cells * cells < n)
        ++cells;
    const double spacing = box / cells;
    const double jitter = 0.05 * spacing;
    std::vector<double> pos(static_cast<std::size_t>(n) * 3);
    int placed = 0;
    for (int ix = 0; ix < cells && placed < n; ++ix)
        for (int iy = 0; iy < cells && placed < n; ++iy)
            for (int iz = 0; iz < cells && placed < n; ++iz) {
                double* r = pos.data() + static_cast<std::size_t>(placed) * 3;
                const int cell[3] = { ix, iy, iz };
                for (int k = 0; k < 3; ++k) {
                    double x = (cell[k] + 0.5) * spacing + jitter * rng.normal();
                    x -= box * std::floor(x / box);
                    r[k] = x;
                }
                ++placed;
            }
    return pos;
}

void compute_forces(const std::vector<double>& pos, const LawSpec& law, double box, int n,
                    std::vector<double>& forces)
{
    forces.assign(static_cast<std::size_t>(n) * 3, 0.0);
    const double cutoff2 = law.lj_cutoff * law.lj_cutoff;
    double disp[3];
    double f[3];
    for (int i = 0; i < n; ++i) {
        double* fi = forces.data() + static_cast<std::size_t>(i) * 3;
        for (int j = 0; j < n; ++j) {
            if (j == i)
                continue;
            minimum_image(pos.data() + static_cast<std::size_t>(i) * 3,
                          pos.data() + static_cast<std::size_t>(j) * 3, box, 3, disp);
            const double r2 = disp[0] * disp[0] + disp[1] * disp[1] + disp[2] * disp[2];
            if (r2 >= cutoff2)
                continue;
            law_force(law, disp, 0.0, 0.0, 1.0, 1.0, 3, f);
            for (int k = 0; k < 3; ++k)
                fi[k] += f[k];
        }
    }
}

} // namespace

Trajectory simulate_lj(const LjSpec& spec, std::uint64_t seed)
{
    spec.validate();
    const int n = spec.n_atoms;
    const int d = 3;
    const LawSpec law = LawSpec::lennard_jones(spec.epsilon_internal(), spec.sigma, spec.cutoff());

    Rng rng(derive_seed(seed, 0));
    std::vector<double> pos = lattice_positions(n, spec.box_length, rng);
    std::vector<double> vel =
        maxwell_boltzmann_velocities(spec.temperature,
                                     std::vector<double>(n, spec.mass), d, derive_seed(seed, 1));

    Trajectory traj;
    traj.law = law;
    traj.d = d;
    traj.n = n;
    traj.dt = spec.dt;
    traj.seed = seed;
    traj.box_length = spec.box_length;
    traj.units = UnitsKind::AngstromPsDalton;
    traj.masses.assign(n, spec.mass);
    traj.charges.assign(n, 0.0);
    const std::size_t frame = static_cast<std::size_t>(n) * d;
    traj.positions.reserve(frame * spec.n_steps);
    traj.velocities.reserve(frame * spec.n_steps);
    traj.accelerations.reserve(frame * spec.n_steps);

    std::vector<double> forces;
    std::vector<double> acc(frame);
    compute_forces(pos, law, spec.box_length, n, forces);
    for (std::size_t i = 0; i < frame; ++i)
        acc[i] = forces[i] / spec.mass;

    const double dt = spec.dt;
    for (int t = 0; t < spec.n_steps; ++t) {
        for (std::size_t i = 0; i < frame; ++i)
            if (!std::isfinite(pos[i]) || !std::isfinite(vel[i]))
                throw DivergedError("lj simulation diverged at step " + std::to_string(t), t);
        traj.positions.insert(traj.positions.end(), pos.begin(), pos.end());
        traj.velocities.insert(traj.velocities.end(), vel.begin(), vel.end());
        traj.accelerations.insert(traj.accelerations.end(), acc.begin(), acc.end());
        if (t + 1 == spec.n_steps)
            break;

        for (std::size_t i = 0; i < frame; ++i) {
            double x = pos[i] + vel[i] * dt + 0.5 * acc[i] * dt * dt;
            x -= spec.box_length * std::floor(x / spec.box_length);
            pos[i] = x;
        }
        compute_forces(pos, law, spec.box_length, n, forces);
        for (std::size_t i = 0; i < frame; ++i) {
            const double a_new = forces[i] / spec.mass;
            vel[i] += 0.5 * (acc[i] + a_new) * dt;
            acc[i] = a_new;
        }
    }
    return traj;
}

double lj_total_energy(const Trajectory& traj, int t)
{
    const int n = traj.n;
    const auto pos = traj.pos(t);
    const auto vel = traj.vel(t);
    double kinetic = 0.0;
    for (int i = 0; i < n; ++i) {
        double v2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double v = vel[static_cast<std::size_t>(i) * 3 + k];
            v2 += v * v;
        }
        kinetic += 0.5 * traj.masses[i] * v2;
    }
    double potential = 0.0;
    double disp[3];
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            minimum_image(pos.data() + static_cast<std::size_t>(i) * 3,
                          pos.data() + static_cast<std::size_t>(j) * 3, traj.box_length, 3, disp);
            const double r2 = disp[0] * disp[0] + disp[1] * disp[1] + disp[2] * disp[2];
            if (r2 >= traj.law.lj_cutoff * traj.law.lj_cutoff)
                continue;
            potential += lj_pair(std::sqrt(r2), traj.law.lj_epsilon, traj.law.lj_sigma,
                                 traj.law.lj_cutoff)
                             .potential;
        }
    return kinetic + potential;
}

} // namespace pairlearn::sim
