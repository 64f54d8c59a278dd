#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pairlearn/dataset.hpp"
#include "pairlearn/errors.hpp"
#include "pairlearn/lj.hpp"
#include "pairlearn/simulate.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numeric>
#include <set>

using namespace pairlearn;
using namespace pairlearn::data;

namespace {

Dataset spring_dataset(int n, int steps, std::uint64_t seed, double beta = 0.0)
{
    auto traj = sim::simulate(sim::sample_initial_system(n, 2, seed), sim::LawSpec::spring(),
                              steps, 2, seed);
    return make_dataset(std::move(traj), Topology::full(), { 0.7, 0.15, 0.15 }, seed + 1, beta,
                        seed + 2);
}

} // namespace

TEST_CASE("feature layout: lengths, offsets, stable descriptor")
{
    FeatureLayout analytic;
    analytic.d = 2;
    CHECK(analytic.node_len() == 6);
    CHECK(analytic.edge_input_len() == 12);
    CHECK(analytic.disp_offset() == -1);
    CHECK(analytic.describe() == "v1:d=2:node=[r,rdot,q,m]:edge=[eta_i,eta_j]");

    FeatureLayout lj;
    lj.d = 3;
    lj.has_charge = false;
    lj.has_disp = true;
    CHECK(lj.node_len() == 7);
    CHECK(lj.edge_input_len() == 17);
    CHECK(lj.disp_offset() == 14);
    CHECK(lj.describe() == "v1:d=3:node=[r,rdot,m]:edge=[eta_i,eta_j,disp]");
}

TEST_CASE("build_snapshot: directed edge counts")
{
    const auto ds8 = spring_dataset(8, 30, 1);
    CHECK(ds8.snapshot(0).n_edges() == 56);
    const auto ds12 = spring_dataset(12, 30, 2);
    CHECK(ds12.snapshot(0).n_edges() == 132);
}

TEST_CASE("build_snapshot: feature vector order is [eta_i, eta_j]")
{
    const auto ds = spring_dataset(3, 30, 7);
    const auto& traj = ds.trajectory;
    const auto snap = ds.snapshot(4);
    const auto pos = traj.pos(4);
    const auto vel = traj.vel(4);
    for (int e = 0; e < snap.n_edges(); ++e) {
        const auto [i, j] = snap.edges[e];
        const auto x = snap.edge_input(e);
        CHECK(x[0] == pos[static_cast<std::size_t>(i) * 2 + 0]);
        CHECK(x[1] == pos[static_cast<std::size_t>(i) * 2 + 1]);
        CHECK(x[2] == vel[static_cast<std::size_t>(i) * 2 + 0]);
        CHECK(x[3] == vel[static_cast<std::size_t>(i) * 2 + 1]);
        CHECK(x[4] == traj.charges[i]);
        CHECK(x[5] == traj.masses[i]);
        CHECK(x[6] == pos[static_cast<std::size_t>(j) * 2 + 0]);
        CHECK(x[11] == traj.masses[j]);
    }
}

TEST_CASE("build_snapshot: reversing an edge swaps the eta blocks exactly")
{
    const auto ds = spring_dataset(5, 30, 3);
    const auto snap = ds.snapshot(11);
    const int node_len = snap.layout.node_len();
    for (int e = 0; e < snap.n_edges(); ++e) {
        const int r = snap.reverse_edge[e];
        CHECK(snap.edges[r].first == snap.edges[e].second);
        CHECK(snap.edges[r].second == snap.edges[e].first);
        const auto xe = snap.edge_input(e);
        const auto xr = snap.edge_input(r);
        for (int k = 0; k < node_len; ++k) {
            CHECK(xe[k] == xr[node_len + k]);
            CHECK(xe[node_len + k] == xr[k]);
        }
    }
}

TEST_CASE("build_snapshot: cutoff topology keeps edges within the radius")
{
    sim::LjSpec spec;
    spec.n_steps = 12;
    const auto traj = sim::simulate_lj(spec, 5);
    const auto ds = make_dataset(traj, Topology::cutoff(spec.cutoff(), spec.box_length),
                                 { 0.4, 0.3, 0.3 }, 1, 0.0, 0);
    const auto snap = ds.snapshot(1);
    CHECK(snap.layout.has_disp);
    CHECK(snap.n_edges() > 0);
    const int off = snap.layout.disp_offset();
    for (int e = 0; e < snap.n_edges(); ++e) {
        const auto x = snap.edge_input(e);
        const double r =
            std::sqrt(x[off] * x[off] + x[off + 1] * x[off + 1] + x[off + 2] * x[off + 2]);
        CHECK(r <= spec.cutoff());
        // displacement of the reverse edge is the exact negation
        const auto xr = snap.edge_input(snap.reverse_edge[e]);
        for (int k = 0; k < 3; ++k)
            CHECK(x[off + k] == -xr[off + k]);
    }
}

TEST_CASE("cutoff topology without box metadata is rejected")
{
    CHECK_THROWS_AS(Topology::cutoff(3.0, 0.0), ConfigError);
}

TEST_CASE("split_timesteps: pinned sizes, determinism, coverage")
{
    const auto s = split_timesteps(10000, { 0.7, 0.15, 0.15 }, 9);
    CHECK(s.train.size() == 7000);
    CHECK(s.valid.size() == 1500);
    CHECK(s.test.size() == 1500);

    const auto s2 = split_timesteps(10000, { 0.7, 0.15, 0.15 }, 9);
    CHECK(s.train == s2.train);
    CHECK(s.test == s2.test);

    std::set<int> all;
    all.insert(s.train.begin(), s.train.end());
    all.insert(s.valid.begin(), s.valid.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 10000);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 9999);

    CHECK_THROWS_AS(split_timesteps(10000, { 0.5, 0.2, 0.2 }, 0), ConfigError);
    CHECK_THROWS_AS(split_timesteps(5, { 0.7, 0.15, 0.15 }, 0), ConfigError);
}

TEST_CASE("finite_difference_kinematics: pinned stencils")
{
    const int T = 9;
    const double dt = 0.1;
    std::vector<double> constant(T, 3.5), vel, acc;
    finite_difference_kinematics(constant, T, 1, dt, vel, acc);
    for (double v : vel)
        CHECK(v == doctest::Approx(0.0));
    for (double a : acc)
        CHECK(a == doctest::Approx(0.0));

    std::vector<double> linear(T);
    for (int t = 0; t < T; ++t)
        linear[t] = 2.0 * t * dt; // r = v t with v = 2
    finite_difference_kinematics(linear, T, 1, dt, vel, acc);
    for (double v : vel)
        CHECK(v == doctest::Approx(2.0));
    for (double a : acc)
        CHECK(a == doctest::Approx(0.0));

    std::vector<double> quad(T);
    for (int t = 0; t < T; ++t)
        quad[t] = 0.5 * 1.75 * (t * dt) * (t * dt); // a = 1.75, exact on quadratics
    finite_difference_kinematics(quad, T, 1, dt, vel, acc);
    for (double a : acc)
        CHECK(a == doctest::Approx(1.75));

    std::vector<double> too_short(2, 0.0);
    CHECK_THROWS_AS(finite_difference_kinematics(too_short, 2, 1, dt, vel, acc), DataError);
}

TEST_CASE("corrupt_positions: beta 0 leaves the trajectory untouched")
{
    const auto ds = spring_dataset(4, 50, 21);
    const auto noisy = corrupt_positions(ds.trajectory, 0.0, 17);
    CHECK(noisy.positions == ds.trajectory.positions);
    CHECK(noisy.velocities == ds.trajectory.velocities);
    CHECK(noisy.accelerations == ds.trajectory.accelerations);
}

TEST_CASE("noise_level: pinned cases")
{
    std::vector<double> clean{ 1.0, 2.0 };
    CHECK(noise_level(clean, clean) == 0.0);
    std::vector<double> doubled{ 2.0, 4.0 };
    CHECK(noise_level(clean, doubled) == doctest::Approx(1.0));
    std::vector<double> hand{ 1.1, 1.8 };
    CHECK(noise_level(clean, hand) == doctest::Approx(0.1));
    std::vector<double> zeros{ 0.0, 0.0 };
    CHECK_THROWS_AS(noise_level(zeros, clean), DataError);
    // zero components are skipped, not divided by
    std::vector<double> part_zero{ 0.0, 2.0 };
    std::vector<double> part_noisy{ 5.0, 3.0 };
    CHECK(noise_level(part_zero, part_noisy) == doctest::Approx(0.5));
}

TEST_CASE("noise level is monotone nondecreasing in beta (paper sweep values)")
{
    const auto ds = spring_dataset(8, 400, 33);
    double prev = 0.0;
    for (double beta : { 1e-7, 5e-7, 1e-6, 5e-6, 1e-5 }) {
        const auto noisy = corrupt_positions(ds.trajectory, beta, 99);
        const double level = noise_level(ds.trajectory.accelerations, noisy.accelerations);
        CHECK(level >= prev);
        prev = level;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("noisy dataset: training drops endpoint steps, eval keeps clean targets")
{
    const auto ds = spring_dataset(4, 60, 5, 1e-5);
    const auto steps = ds.train_steps();
    for (int t : steps) {
        CHECK(t != 0);
        CHECK(t != 59);
    }
    // Training targets differ from clean; eval targets are the clean ones.
    bool differs = false;
    const auto train_snap = ds.snapshot(10);
    const auto eval_snap = ds.eval_snapshot(10);
    for (std::size_t i = 0; i < train_snap.target_acc.size(); ++i)
        if (train_snap.target_acc[i] != eval_snap.target_acc[i])
            differs = true;
    CHECK(differs);
    // Features (noisy positions) are shared between the two snapshot kinds.
    CHECK(train_snap.edge_inputs == eval_snap.edge_inputs);
}

TEST_CASE("dataset: split determinism through make_dataset")
{
    const auto a = spring_dataset(4, 80, 13);
    const auto b = spring_dataset(4, 80, 13);
    CHECK(a.split.train == b.split.train);
    CHECK(a.split.test == b.split.test);
}
