#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pairlearn/dataset.hpp"
#include "pairlearn/errors.hpp"
#include "pairlearn/model.hpp"
#include "pairlearn/rng.hpp"
#include "pairlearn/simulate.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace pairlearn;
using namespace pairlearn::model;
using testutil::rel_err;

namespace {

data::Dataset make_ds(sim::LawSpec law, int n, int steps, std::uint64_t seed)
{
    auto traj = sim::simulate(sim::sample_initial_system(n, 2, seed), law, steps, 2, seed);
    return data::make_dataset(std::move(traj), data::Topology::full(), { 0.7, 0.15, 0.15 },
                              seed + 1, 0.0, 0);
}

Model small_model(ModelKind kind, const data::FeatureLayout& layout, std::uint64_t seed,
                  int n_nodes = 0, bool scalar_messages = false,
                  ad::Activation act = ad::Activation::SiLU)
{
    ModelConfig mc;
    mc.kind = kind;
    mc.hidden = { 12, 10 };
    mc.activation = act;
    mc.scalar_messages = scalar_messages;
    mc.init_seed = seed;
    mc.n_nodes = n_nodes;
    return make_model(mc, layout);
}

// Acceleration loss of one snapshot plus alpha times the symmetry term,
// computed through predict() only: the independent route for gradient
// checks of model_backward.
double objective_via_predict(const Model& m, const data::GraphSnapshot& snap, double alpha)
{
    ModelWork work;
    const auto pred = predict(m, snap, work);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.accelerations.size(); ++i)
        acc += std::fabs(pred.accelerations[i] - snap.target_acc[i]);
    acc /= snap.n_nodes;
    if (alpha == 0.0)
        return acc;
    const int msg_dim = m.message_dim();
    double sym = 0.0;
    for (int e = 0; e < snap.n_edges(); ++e) {
        const int r = snap.reverse_edge[e];
        for (int k = 0; k < msg_dim; ++k)
            sym += std::fabs(pred.messages[static_cast<std::size_t>(e) * msg_dim + k] +
                             pred.messages[static_cast<std::size_t>(r) * msg_dim + k]);
    }
    return acc + alpha * sym / snap.n_edges();
}

} // namespace

TEST_CASE("edge_messages: pinned behaviours")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 3, 30, 1);
    const auto snap = ds.snapshot(2);
    ModelWork work;

    // Zero-weight edge net emits zero messages; a full 3-node graph has
    // exactly 6 of them.
    Model m = small_model(ModelKind::Force, ds.layout, 3);
    std::fill(m.edge_net.theta().begin(), m.edge_net.theta().end(), 0.0);
    std::vector<double> messages;
    edge_messages(m, snap, work, messages);
    CHECK(messages.size() == 12); // 6 edges x d=2
    for (double v : messages)
        CHECK(v == 0.0);

    // Identical feature vectors produce identical messages.
    Model r = small_model(ModelKind::Force, ds.layout, 7);
    auto snap2 = snap;
    std::copy(snap2.edge_inputs.begin(), snap2.edge_inputs.begin() + ds.layout.edge_input_len(),
              snap2.edge_inputs.begin() + ds.layout.edge_input_len());
    edge_messages(r, snap2, work, messages);
    CHECK(messages[0] == messages[2]);
    CHECK(messages[1] == messages[3]);
}

TEST_CASE("node_operator_force: pinned examples")
{
    // Two messages (1,0) and (3,0) into a node with m=2 -> (2,0).
    data::GraphSnapshot snap;
    snap.n_nodes = 3;
    snap.d = 2;
    snap.edges = { { 0, 1 }, { 0, 2 }, { 1, 0 }, { 1, 2 }, { 2, 0 }, { 2, 1 } };
    snap.masses = { 2.0, 1.0, 1.0 };
    std::vector<double> msgs{ 1, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0 };
    std::vector<double> acc(6);
    node_operator_force(msgs, snap, acc);
    CHECK(acc[0] == doctest::Approx(2.0));
    CHECK(acc[1] == doctest::Approx(0.0));

    // All-zero messages: zero acceleration.
    std::fill(msgs.begin(), msgs.end(), 0.0);
    node_operator_force(msgs, snap, acc);
    for (double a : acc)
        CHECK(a == 0.0);

    // Scaling all masses by 2 halves the accelerations.
    msgs = { 1, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0 };
    snap.masses = { 4.0, 2.0, 2.0 };
    node_operator_force(msgs, snap, acc);
    CHECK(acc[0] == doctest::Approx(1.0));

    snap.masses = { 0.0, 1.0, 1.0 };
    CHECK_THROWS_AS(node_operator_force(msgs, snap, acc), InvariantViolation);
}

TEST_CASE("oracle force reproduces simulator accelerations to 1e-12")
{
    for (const auto law : { sim::LawSpec::spring(), sim::LawSpec::charge(),
                            sim::LawSpec::orbital(), sim::LawSpec::discontinuous() }) {
        const auto ds = make_ds(law, 5, 40, 11);
        const Model oracle = make_oracle(ModelKind::OracleForce, law, ds.layout);
        ModelWork work;
        double worst = 0.0;
        for (int t = 0; t < ds.steps(); t += 3) {
            const auto snap = ds.eval_snapshot(t);
            const auto pred = predict(oracle, snap, work);
            for (std::size_t i = 0; i < pred.accelerations.size(); ++i)
                worst =
                    std::max(worst, std::fabs(pred.accelerations[i] - snap.target_acc[i]));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("oracle potential through the node operator matches the analytic force")
{
    // The quadratic pairwise energy 0.5*k*r^2 (spring with L=0) pushed
    // through the potential operator must reproduce the spring force k*r.
    const auto law = sim::LawSpec::spring(2.0, 0.0);
    const auto ds = make_ds(law, 4, 30, 5);
    const Model oracle = make_oracle(ModelKind::OraclePotential, law, ds.layout);
    ModelWork work;
    for (int t = 0; t < ds.steps(); t += 5) {
        const auto snap = ds.eval_snapshot(t);
        std::vector<double> acc(static_cast<std::size_t>(snap.n_nodes) * 2);
        std::vector<double> forces;
        node_operator_potential(oracle, snap, work, acc, &forces);
        for (std::size_t i = 0; i < acc.size(); ++i)
            CHECK(rel_err(acc[i], snap.target_acc[i], 1e-8) < 1e-10);
        double f_true[2];
        for (int e = 0; e < snap.n_edges(); ++e) {
            const auto [i, j] = snap.edges[e];
            ds.trajectory.edge_force(t, i, j, f_true);
            CHECK(rel_err(forces[static_cast<std::size_t>(e) * 2], f_true[0], 1e-8) < 1e-6);
            CHECK(rel_err(forces[static_cast<std::size_t>(e) * 2 + 1], f_true[1], 1e-8) < 1e-6);
        }
    }
}

TEST_CASE("potential operator: position-independent net gives zero acceleration")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 30, 9);
    Model m = small_model(ModelKind::Potential, ds.layout, 13);
    // Zero the first-layer weight rows of every position coordinate: the
    // output no longer depends on any position input.
    const auto& view = m.edge_net.layer(0);
    const int node_len = ds.layout.node_len();
    for (const int base : { 0, node_len })
        for (int k = 0; k < 2; ++k)
            for (int c = 0; c < view.out; ++c)
                m.edge_net.weights(0)[(base + k) * view.out + c] = 0.0;
    ModelWork work;
    const auto snap = ds.eval_snapshot(3);
    std::vector<double> acc(8);
    node_operator_potential(m, snap, work, acc);
    for (double a : acc)
        CHECK(a == 0.0);
}

TEST_CASE("potential operator matches finite differences of summed incoming messages")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 30, 17);
    const Model m = small_model(ModelKind::Potential, ds.layout, 21);
    ModelWork work;
    auto snap = ds.eval_snapshot(7);
    std::vector<double> acc(8);
    node_operator_potential(m, snap, work, acc);

    // FD route: perturb r_i only where it appears in the receiver block of
    // the incoming edges of node i.
    const int in_len = ds.layout.edge_input_len();
    for (int i = 0; i < snap.n_nodes; ++i) {
        for (int k = 0; k < 2; ++k) {
            const auto sum_messages = [&](double eps) {
                auto probe = snap;
                for (int e = probe.node_edge_begin[i]; e < probe.node_edge_end[i]; ++e)
                    probe.edge_inputs[static_cast<std::size_t>(e) * in_len + k] += eps;
                ModelWork w2;
                std::vector<double> msgs;
                edge_messages(m, probe, w2, msgs);
                double total = 0.0;
                for (int e = probe.node_edge_begin[i]; e < probe.node_edge_end[i]; ++e)
                    total += msgs[e];
                return total;
            };
            const double fd = (sum_messages(testutil::fd_eps) - sum_messages(-testutil::fd_eps)) /
                              (2 * testutil::fd_eps);
            const double expected = -fd / snap.masses[i];
            CHECK(rel_err(acc[static_cast<std::size_t>(i) * 2 + k], expected) < 1e-5);
        }
    }
}

TEST_CASE("baseline: pinned behaviours")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 2, 30, 23);
    ModelWork work;
    // Zero node net -> zero accelerations.
    Model m = small_model(ModelKind::Baseline, ds.layout, 29);
    std::fill(m.node_net.theta().begin(), m.node_net.theta().end(), 0.0);
    const auto snap = ds.eval_snapshot(1);
    auto pred = predict(m, snap, work);
    for (double a : pred.accelerations)
        CHECK(a == 0.0);

    // n=2: the output equals the node net applied to [eta_i, M_ij] for the
    // single incoming edge.
    Model b = small_model(ModelKind::Baseline, ds.layout, 31);
    pred = predict(b, snap, work);
    std::vector<double> messages;
    edge_messages(b, snap, work, messages);
    const int node_len = ds.layout.node_len();
    std::vector<double> input(node_len + 2);
    std::vector<double> y(2);
    for (int i = 0; i < 2; ++i) {
        std::copy(snap.node_features.begin() + i * node_len,
                  snap.node_features.begin() + (i + 1) * node_len, input.begin());
        const int e = snap.node_edge_begin[i];
        input[node_len] = messages[static_cast<std::size_t>(e) * 2];
        input[node_len + 1] = messages[static_cast<std::size_t>(e) * 2 + 1];
        ad::MlpWork nw;
        ad::mlp_forward(b.node_net, input, nw, y);
        CHECK(pred.accelerations[static_cast<std::size_t>(i) * 2] == y[0]);
        CHECK(pred.accelerations[static_cast<std::size_t>(i) * 2 + 1] == y[1]);
    }
}

TEST_CASE("learned scale: pinned behaviours and force-operator equivalence")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 3, 30, 37);
    const auto snap = ds.eval_snapshot(2);
    ModelWork work;

    // w = 0 divides by 1: identical to the raw message sum.
    Model m = small_model(ModelKind::LearnedScale, ds.layout, 41, 3);
    auto pred = predict(m, snap, work);
    std::vector<double> messages;
    edge_messages(m, snap, work, messages);
    std::vector<double> expected(6, 0.0);
    for (int e = 0; e < snap.n_edges(); ++e)
        for (int k = 0; k < 2; ++k)
            expected[static_cast<std::size_t>(snap.edges[e].first) * 2 + k] +=
                messages[static_cast<std::size_t>(e) * 2 + k];
    for (int i = 0; i < 6; ++i)
        CHECK(pred.accelerations[i] == doctest::Approx(expected[i]));

    // w = 1 divides the sum by 10.
    m.node_scalars.assign(3, 1.0);
    pred = predict(m, snap, work);
    for (int i = 0; i < 6; ++i)
        CHECK(pred.accelerations[i] == doctest::Approx(expected[i] / 10.0));

    // Shared w = log10(mass) on an equal-mass system equals the
    // deterministic force operator.
    auto sys = sim::sample_initial_system(3, 2, 43);
    for (auto& p : sys)
        p.m = 2.5;
    auto traj = sim::simulate(sys, sim::LawSpec::spring(), 30, 2, 43);
    auto eq_ds = data::make_dataset(std::move(traj), data::Topology::full(),
                                    { 0.7, 0.15, 0.15 }, 1, 0.0, 0);
    const auto eq_snap = eq_ds.eval_snapshot(4);
    Model shared = small_model(ModelKind::LearnedScaleShared, eq_ds.layout, 47);
    shared.node_scalars[0] = std::log10(2.5);
    const auto pred_shared = predict(shared, eq_snap, work);
    edge_messages(shared, eq_snap, work, messages);
    std::vector<double> acc_force(6);
    node_operator_force(messages, eq_snap, acc_force);
    for (int i = 0; i < 6; ++i)
        CHECK(pred_shared.accelerations[i] == doctest::Approx(acc_force[i]).epsilon(1e-12));
}

TEST_CASE("learned scale: acceleration refused on a different system size")
{
    const auto ds8 = make_ds(sim::LawSpec::spring(), 8, 30, 51);
    const auto ds12 = make_ds(sim::LawSpec::spring(), 12, 30, 53);
    const Model m = small_model(ModelKind::LearnedScale, ds8.layout, 55, 8);
    ModelWork work;
    const auto snap = ds12.eval_snapshot(0);
    CHECK_THROWS_AS(predict(m, snap, work), ConfigError);
    // Edge-level prediction still works.
    const auto pred = predict(m, snap, work, true);
    CHECK(pred.accelerations.empty());
    CHECK(pred.forces.size() == static_cast<std::size_t>(snap.n_edges()) * 2);
}

TEST_CASE("extract_pairwise: force variant reproduces the node operator bitwise")
{
    const auto ds = make_ds(sim::LawSpec::charge(), 4, 30, 57);
    const Model m = small_model(ModelKind::Force, ds.layout, 59);
    ModelWork work;
    const auto snap = ds.eval_snapshot(6);
    const auto pred = predict(m, snap, work);
    CHECK(pred.forces == pred.messages);
    std::vector<double> acc(8);
    node_operator_force(pred.forces, snap, acc);
    CHECK(acc == pred.accelerations);
}

TEST_CASE("permutation equivariance: relabeling particles permutes predictions")
{
    auto sys = sim::sample_initial_system(5, 2, 61);
    auto rev_sys = sys;
    std::reverse(rev_sys.begin(), rev_sys.end());
    auto traj = sim::simulate(sys, sim::LawSpec::spring(), 12, 2, 61);
    auto rev_traj = sim::simulate(rev_sys, sim::LawSpec::spring(), 12, 2, 61);
    auto ds = data::make_dataset(std::move(traj), data::Topology::full(), { 0.7, 0.15, 0.15 }, 1,
                                 0.0, 0);
    auto rev_ds = data::make_dataset(std::move(rev_traj), data::Topology::full(),
                                     { 0.7, 0.15, 0.15 }, 1, 0.0, 0);
    ModelWork work;
    for (ModelKind kind : { ModelKind::Force, ModelKind::Potential, ModelKind::Baseline,
                            ModelKind::LearnedScaleShared }) {
        const Model m = small_model(kind, ds.layout, 63, 5);
        const auto pred = predict(m, ds.eval_snapshot(3), work);
        const auto rev_pred = predict(m, rev_ds.eval_snapshot(3), work);
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k < 2; ++k)
                CHECK(pred.accelerations[static_cast<std::size_t>(i) * 2 + k] ==
                      doctest::Approx(
                          rev_pred.accelerations[static_cast<std::size_t>(4 - i) * 2 + k])
                          .epsilon(1e-10));
    }
}

TEST_CASE("model_backward gradients match finite differences for every kind")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 30, 67);
    const auto snap = ds.snapshot(5);

    struct Case {
        ModelKind kind;
        bool scalar_messages;
        double alpha;
    };
    const std::vector<Case> cases = {
        { ModelKind::Force, false, 0.0 },
        { ModelKind::Force, false, 0.5 },
        { ModelKind::Potential, false, 0.0 },
        { ModelKind::Baseline, false, 0.0 },
        { ModelKind::Baseline, false, 2.0 },
        { ModelKind::Baseline, true, 0.0 },
        { ModelKind::LearnedScale, false, 0.0 },
        { ModelKind::LearnedScaleShared, false, 0.25 },
    };
    Rng rng(71);
    for (const auto& c : cases) {
        CAPTURE(static_cast<int>(c.kind));
        CAPTURE(c.alpha);
        Model m = small_model(c.kind, ds.layout, rng.next_u64(), 4, c.scalar_messages,
                              ad::Activation::Tanh);
        if (!m.node_scalars.empty())
            for (auto& w : m.node_scalars)
                w = 0.2 * rng.normal();
        ModelWork work;
        std::vector<double> grad(m.n_params(), 0.0);
        model_backward(m, snap, work, grad, 1.0, c.alpha);

        std::vector<double> params(m.n_params());
        m.copy_params(params);
        // Probe a random subset of parameters plus all node scalars.
        std::vector<std::size_t> probes;
        for (int p = 0; p < 25; ++p)
            probes.push_back(rng.next_u64() % m.n_params());
        for (std::size_t s = 0; s < m.node_scalars.size(); ++s)
            probes.push_back(m.n_params() - 1 - s);
        for (const std::size_t p : probes) {
            auto plus = params, minus = params;
            plus[p] += testutil::fd_eps;
            minus[p] -= testutil::fd_eps;
            Model mp = m, mm = m;
            mp.set_params(plus);
            mm.set_params(minus);
            const double fd = (objective_via_predict(mp, snap, c.alpha) -
                               objective_via_predict(mm, snap, c.alpha)) /
                              (2 * testutil::fd_eps);
            CHECK(rel_err(grad[p], fd) < 1e-4);
        }
    }
}

TEST_CASE("potential model rejects relu, accepts leaky relu with a warning")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 3, 30, 73);
    ModelConfig mc;
    mc.kind = ModelKind::Potential;
    mc.hidden = { 8 };
    mc.activation = ad::Activation::ReLU;
    CHECK_THROWS_AS(make_model(mc, ds.layout), ConfigError);
    mc.activation = ad::Activation::LeakyReLU;
    CHECK_NOTHROW(make_model(mc, ds.layout));
}

TEST_CASE("checkpoint roundtrip preserves everything")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pairlearn_test_model";
    fs::create_directories(dir);
    const auto ds = make_ds(sim::LawSpec::charge(), 4, 30, 79);

    for (ModelKind kind : { ModelKind::Force, ModelKind::Potential, ModelKind::Baseline,
                            ModelKind::LearnedScale }) {
        const Model m = small_model(kind, ds.layout, 83, 4);
        const std::string path = (dir / "ckpt.json").string();
        save_checkpoint(m, path, 12345);
        const Model back = load_checkpoint(path);
        CHECK(back.kind == m.kind);
        CHECK(back.layout == m.layout);
        CHECK(back.edge_net.dims() == m.edge_net.dims());
        CHECK(std::equal(back.edge_net.theta().begin(), back.edge_net.theta().end(),
                         m.edge_net.theta().begin()));
        if (kind == ModelKind::Baseline)
            CHECK(std::equal(back.node_net.theta().begin(), back.node_net.theta().end(),
                             m.node_net.theta().begin()));
        CHECK(back.node_scalars == m.node_scalars);
    }
    const Model oracle = make_oracle(ModelKind::OracleForce, sim::LawSpec::charge(), ds.layout);
    save_checkpoint(oracle, (dir / "oracle.json").string(), 0);
    const Model oback = load_checkpoint((dir / "oracle.json").string());
    CHECK(oback.kind == ModelKind::OracleForce);
    CHECK(oback.oracle_law.kind == sim::LawKind::Charge);
    fs::remove_all(dir);
}

TEST_CASE("layout mismatch between model and snapshot is refused")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 3, 30, 89);
    data::FeatureLayout other = ds.layout;
    other.has_charge = false;
    const Model m = small_model(ModelKind::Force, other, 91);
    ModelWork work;
    CHECK_THROWS_AS(predict(m, ds.eval_snapshot(0), work), ConfigError);
}
