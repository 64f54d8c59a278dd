#include "pairlearn/simulate.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/rng.hpp"

#include <cmath>
#include <string>

namespace pairlearn::sim {

std::vector<ParticleState> sample_initial_system(int n_particles, int d, std::uint64_t seed)
{
    if (n_particles < 2)
        throw ConfigError("sample_initial_system: need at least two particles");
    if (d != 2 && d != 3)
        throw ConfigError("sample_initial_system: d must be 2 or 3");
    Rng rng(seed);
    std::vector<ParticleState> system(n_particles);
    for (auto& p : system) {
        p.m = std::exp(rng.uniform(-1.0, 1.0));
        p.q = rng.uniform(-1.0, 1.0);
        for (int k = 0; k < d; ++k)
            p.r[k] = rng.normal();
        for (int k = 0; k < d; ++k)
            p.v[k] = rng.normal();
    }
    return system;
}

namespace {

// Per-step force table: all directed edges F_ij, plus the per-particle sum
// accumulated over ascending j. Models aggregate incoming messages in the
// same order, which is what makes the oracle-equivalence check exact.
void evaluate_edges(const LawSpec& law, const std::vector<double>& pos,
                    const std::vector<double>& masses, const std::vector<double>& charges, int n,
                    int d, std::vector<double>& edge_f, std::vector<double>& edge_p,
                    std::vector<double>& acc, bool want_potentials)
{
    double disp[3];
    double f[3];
    for (int i = 0; i < n; ++i) {
        double* ai = acc.data() + static_cast<std::size_t>(i) * d;
        for (int k = 0; k < d; ++k)
            ai[k] = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i)
                continue;
            for (int k = 0; k < d; ++k)
                disp[k] = pos[static_cast<std::size_t>(j) * d + k] -
                          pos[static_cast<std::size_t>(i) * d + k];
            law_force(law, disp, charges[i], charges[j], masses[i], masses[j], d, f);
            const int e = Trajectory::full_edge_index(n, i, j);
            for (int k = 0; k < d; ++k) {
                edge_f[static_cast<std::size_t>(e) * d + k] = f[k];
                ai[k] += f[k];
            }
            if (want_potentials)
                edge_p[e] = law_potential(law, disp, charges[i], charges[j], masses[i], masses[j], d);
        }
        for (int k = 0; k < d; ++k)
            ai[k] /= masses[i];
    }
}

} // namespace

Trajectory simulate(const std::vector<ParticleState>& system, const LawSpec& law, int n_steps,
                    int d, std::uint64_t seed, const SimulateOptions& options)
{
    const int n = static_cast<int>(system.size());
    if (n < 1)
        throw ConfigError("simulate: empty system");
    if (n_steps < 1)
        throw ConfigError("simulate: need at least one step");

    Trajectory traj;
    traj.law = law;
    traj.d = d;
    traj.n = n;
    traj.dt = options.dt;
    traj.seed = seed;
    traj.masses.resize(n);
    traj.charges.resize(n);
    for (int i = 0; i < n; ++i) {
        traj.masses[i] = system[i].m;
        traj.charges[i] = system[i].q;
        if (!(system[i].m > 0.0))
            throw InvariantViolation("simulate: non-positive mass");
    }

    const std::size_t frame = static_cast<std::size_t>(n) * d;
    const int n_edges = n * (n - 1);
    std::vector<double> pos(frame), vel(frame);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            pos[static_cast<std::size_t>(i) * d + k] = system[i].r[k];
            vel[static_cast<std::size_t>(i) * d + k] = system[i].v[k];
        }

    traj.positions.reserve(frame * n_steps);
    traj.velocities.reserve(frame * n_steps);
    traj.accelerations.reserve(frame * n_steps);
    if (options.record_labels) {
        traj.edge_forces.reserve(static_cast<std::size_t>(n_edges) * d * n_steps);
        traj.edge_potentials.reserve(static_cast<std::size_t>(n_edges) * n_steps);
    }

    std::vector<double> edge_f(static_cast<std::size_t>(n_edges) * d);
    std::vector<double> edge_p(n_edges);
    std::vector<double> acc(frame);
    evaluate_edges(law, pos, traj.masses, traj.charges, n, d, edge_f, edge_p, acc,
                   options.record_labels);

    if (options.substeps < 1)
        throw ConfigError("simulate: substeps must be at least 1");
    const double dt = options.dt / options.substeps;
    std::vector<double> acc_old(frame);
    for (int t = 0; t < n_steps; ++t) {
        for (std::size_t i = 0; i < frame; ++i)
            if (!std::isfinite(pos[i]) || !std::isfinite(vel[i]))
                throw DivergedError("simulation diverged at step " + std::to_string(t), t);
        traj.positions.insert(traj.positions.end(), pos.begin(), pos.end());
        traj.velocities.insert(traj.velocities.end(), vel.begin(), vel.end());
        traj.accelerations.insert(traj.accelerations.end(), acc.begin(), acc.end());
        if (options.record_labels) {
            traj.edge_forces.insert(traj.edge_forces.end(), edge_f.begin(), edge_f.end());
            traj.edge_potentials.insert(traj.edge_potentials.end(), edge_p.begin(), edge_p.end());
        }
        if (t + 1 == n_steps)
            break;

        // velocity Verlet between recorded states
        for (int s = 0; s < options.substeps; ++s) {
            const bool last_substep = s + 1 == options.substeps;
            for (std::size_t i = 0; i < frame; ++i)
                pos[i] += vel[i] * dt + 0.5 * acc[i] * dt * dt;
            acc_old = acc;
            evaluate_edges(law, pos, traj.masses, traj.charges, n, d, edge_f, edge_p, acc,
                           options.record_labels && last_substep);
            for (std::size_t i = 0; i < frame; ++i)
                vel[i] += 0.5 * (acc_old[i] + acc[i]) * dt;
        }
    }
    return traj;
}

std::vector<double> total_momentum(const Trajectory& traj, int t)
{
    std::vector<double> p(traj.d, 0.0);
    const auto vel = traj.vel(t);
    for (int i = 0; i < traj.n; ++i)
        for (int k = 0; k < traj.d; ++k)
            p[k] += traj.masses[i] * vel[static_cast<std::size_t>(i) * traj.d + k];
    return p;
}

double total_energy(const Trajectory& traj, int t)
{
    double kinetic = 0.0;
    const auto vel = traj.vel(t);
    for (int i = 0; i < traj.n; ++i) {
        double v2 = 0.0;
        for (int k = 0; k < traj.d; ++k) {
            const double v = vel[static_cast<std::size_t>(i) * traj.d + k];
            v2 += v * v;
        }
        kinetic += 0.5 * traj.masses[i] * v2;
    }
    double potential = 0.0;
    for (int i = 0; i < traj.n; ++i)
        for (int j = i + 1; j < traj.n; ++j)
            potential += traj.edge_potential(t, i, j);
    return kinetic + potential;
}

} // namespace pairlearn::sim
