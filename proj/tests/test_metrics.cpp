#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pairlearn/errors.hpp"
#include "pairlearn/field.hpp"
#include "pairlearn/metrics.hpp"
#include "pairlearn/rng.hpp"
#include "pairlearn/simulate.hpp"
#include "test_util.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace pairlearn;
using namespace pairlearn::metrics;
using testutil::rel_err;

namespace {

data::Dataset make_ds(sim::LawSpec law, int n, int steps, std::uint64_t seed)
{
    auto traj = sim::simulate(sim::sample_initial_system(n, 2, seed), law, steps, 2, seed);
    return data::make_dataset(std::move(traj), data::Topology::full(), { 0.7, 0.15, 0.15 },
                              seed + 1, 0.0, 0);
}

model::Model constant_message_model(const data::FeatureLayout& layout, double cx, double cy)
{
    model::ModelConfig mc;
    mc.kind = model::ModelKind::Force;
    mc.hidden = { 4 };
    mc.init_seed = 1;
    model::Model m = model::make_model(mc, layout);
    std::fill(m.edge_net.theta().begin(), m.edge_net.theta().end(), 0.0);
    // Output-layer biases set the constant message.
    const auto& out_layer = m.edge_net.layer(1);
    m.edge_net.theta()[out_layer.b_offset] = cx;
    m.edge_net.theta()[out_layer.b_offset + 1] = cy;
    return m;
}

} // namespace

TEST_CASE("mae_inter / mae_part: pinned micro-cases")
{
    // pred == truth -> 0
    std::vector<double> a{ 1.0, 2.0 };
    CHECK(mae_inter(a, a, 1, 2, 1) == 0.0);
    // single edge, single step, scalars 1 vs 0 -> 1
    std::vector<double> one{ 1.0 }, zero{ 0.0 };
    CHECK(mae_inter(one, zero, 1, 1, 1) == doctest::Approx(1.0));
    // two 2D edges with errors (1,0) and (0,1): l1 of each is 1, mean is 1
    std::vector<double> pred{ 1, 0, 0, 1 }, truth{ 0, 0, 0, 0 };
    CHECK(mae_inter(pred, truth, 1, 2, 2) == doctest::Approx(1.0));
    CHECK(mae_part(pred, truth, 1, 2, 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mae_inter(one, a, 1, 2, 1), ConfigError);
}

TEST_CASE("pairwise_sum matches naive summation")
{
    Rng rng(5);
    std::vector<double> v(1023);
    double naive = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        naive += x;
    }
    auto copy = v;
    CHECK(pairwise_sum(copy) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("force_suite on the ground-truth oracle returns the all-zeros report")
{
    for (const auto law : { sim::LawSpec::spring(), sim::LawSpec::charge(),
                            sim::LawSpec::orbital(), sim::LawSpec::discontinuous() }) {
        const auto ds = make_ds(law, 5, 40, 3);
        const auto oracle = model::make_oracle(model::ModelKind::OracleForce, law, ds.layout);
        const auto rep = force_suite(oracle, ds, ds.split.test, 2);
        CHECK(rep.mae_acc <= 1e-12);
        CHECK(rep.mae_ef <= 1e-12);
        CHECK(rep.mae_nf <= 1e-12);
        CHECK(rep.mae_symm_f <= 1e-12);
    }
}

TEST_CASE("force_suite: constant message c gives MAE_symm = 2*l1(c)")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 40, 7);
    const auto m = constant_message_model(ds.layout, 0.75, -0.5);
    const auto rep = force_suite(m, ds, ds.split.test, 1);
    CHECK(rep.mae_symm_f == doctest::Approx(2.0 * (0.75 + 0.5)));
}

TEST_CASE("relative metrics divide by the mean absolute ground truth")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 60, 9);
    const auto m = constant_message_model(ds.layout, 0.3, 0.1);
    const auto rep = force_suite(m, ds, ds.split.test, 1);

    // Independent recomputation of the denominators over the test steps.
    double f_mag = 0.0, acc_mag = 0.0;
    long n_edges = 0, n_nodes = 0;
    double f[2];
    for (int t : ds.split.test) {
        for (int i = 0; i < ds.trajectory.n; ++i) {
            for (int j = 0; j < ds.trajectory.n; ++j) {
                if (i == j)
                    continue;
                ds.trajectory.edge_force(t, i, j, f);
                f_mag += std::fabs(f[0]) + std::fabs(f[1]);
                ++n_edges;
            }
            const auto acc = ds.trajectory.acc(t);
            acc_mag += std::fabs(acc[static_cast<std::size_t>(i) * 2]) +
                       std::fabs(acc[static_cast<std::size_t>(i) * 2 + 1]);
            ++n_nodes;
        }
    }
    f_mag /= n_edges;
    acc_mag /= n_nodes;
    CHECK(rel_err(rep.rel_ef, rep.mae_ef / f_mag, 1e-12) < 1e-10);
    CHECK(rel_err(rep.rel_symm_f, rep.mae_symm_f / f_mag, 1e-12) < 1e-10);
    CHECK(rel_err(rep.rel_acc, rep.mae_acc / acc_mag, 1e-12) < 1e-10);
}

TEST_CASE("potential_suite on the oracle returns zeros; offsets cancel in increments")
{
    const auto ds = make_ds(sim::LawSpec::spring(), 4, 40, 11);
    const auto oracle =
        model::make_oracle(model::ModelKind::OraclePotential, ds.trajectory.law, ds.layout);
    const auto rep = potential_suite(oracle, ds, ds.split.test, 0, 2);
    CHECK(rep.mae_acc <= 1e-10);
    CHECK(rep.mae_dep <= 1e-10);
    CHECK(rep.mae_dnp <= 1e-10);
    CHECK(rep.mae_symm_p <= 1e-10);
    CHECK(rep.mae_ef <= 1e-10);
    CHECK(rep.mae_nf <= 1e-10);

    // Offset invariance: a static equilibrium system has P identically zero;
    // a constant-bias net predicts P-hat = c, and the increments cancel the
    // offset exactly (MAE_dep = 0) while symmetry also holds by construction.
    std::vector<sim::ParticleState> sys(2);
    sys[0].r = { 0, 0, 0 };
    sys[1].r = { 1, 0, 0 };
    auto traj = sim::simulate(sys, sim::LawSpec::spring(2.0, 1.0), 40, 2, 0);
    auto static_ds = data::make_dataset(std::move(traj), data::Topology::full(),
                                        { 0.7, 0.15, 0.15 }, 1, 0.0, 0);
    model::ModelConfig mc;
    mc.kind = model::ModelKind::Potential;
    mc.hidden = { 4 };
    model::Model offset_model = model::make_model(mc, static_ds.layout);
    std::fill(offset_model.edge_net.theta().begin(), offset_model.edge_net.theta().end(), 0.0);
    offset_model.edge_net.theta()[offset_model.edge_net.layer(1).b_offset] = 3.25; // P-hat = c
    const auto rep2 = potential_suite(offset_model, static_ds, static_ds.split.test, 0, 1);
    CHECK(rep2.mae_dep == 0.0);
    CHECK(rep2.mae_symm_p == 0.0);
    CHECK(rep2.mae_acc == 0.0); // constant potential has zero gradient
}

TEST_CASE("discontinuity offset statistics: pinned hand constructions")
{
    const std::vector<double> r{ 1.0, 1.5, 2.5, 3.0 };
    // P-hat = P + 1 everywhere: means (1, 1), stds (0, 0).
    auto st = discontinuity_stats_from_samples(r, std::vector<double>{ 1, 1, 1, 1 }, 2.0);
    CHECK(st.below.mean == doctest::Approx(1.0));
    CHECK(st.above.mean == doctest::Approx(1.0));
    CHECK(st.below.stddev == doctest::Approx(0.0));
    CHECK(st.above.stddev == doctest::Approx(0.0));
    // P-hat = P + 1 only below theta: means (1, 0).
    st = discontinuity_stats_from_samples(r, std::vector<double>{ 1, 1, 0, 0 }, 2.0);
    CHECK(st.below.mean == doctest::Approx(1.0));
    CHECK(st.above.mean == doctest::Approx(0.0));
    // Empty region is flagged by count 0, not an error.
    st = discontinuity_stats_from_samples(std::vector<double>{ 0.5 },
                                          std::vector<double>{ 4.0 }, 2.0);
    CHECK(st.above.count == 0);
    CHECK(st.below.count == 1);

    // P-hat == P: both regions report (0, 0). Use the oracle.
    const auto law = sim::LawSpec::discontinuous();
    const auto ds = make_ds(law, 5, 40, 13);
    const auto oracle = model::make_oracle(model::ModelKind::OraclePotential, law, ds.layout);
    const auto st2 = discontinuity_offset_stats(oracle, ds, ds.split.test, law.theta);
    CHECK(std::fabs(st2.below.mean) <= 1e-12);
    CHECK(std::fabs(st2.above.mean) <= 1e-12);
    CHECK(st2.below.stddev <= 1e-12);
    CHECK(st2.above.stddev <= 1e-12);
    CHECK(st2.below.count + st2.above.count ==
          static_cast<long>(ds.split.test.size()) * ds.trajectory.full_edge_count());
}

TEST_CASE("aggregate_reports: pinned mean and population std")
{
    MetricsReport a, b;
    a.mae_ef = 1.0;
    b.mae_ef = 3.0;
    a.mae_acc = 2.0;
    b.mae_acc = 2.0;
    const auto agg = aggregate_reports({ a, b });
    CHECK(agg.mean.mae_ef == doctest::Approx(2.0));
    CHECK(agg.stddev.mae_ef == doctest::Approx(1.0)); // population std of {1,3}
    CHECK(agg.stddev.mae_acc == doctest::Approx(0.0));
    CHECK(std::isnan(agg.mean.mae_dep));
}

TEST_CASE("metrics json/csv roundtrip")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pairlearn_test_metrics";
    fs::create_directories(dir);
    MetricsReport r;
    r.mae_acc = 0.125;
    r.mae_ef = 0.5;
    r.model_kind = "force";
    r.dataset_name = "spring_d2";
    const std::string path = (dir / "m.json").string();
    save_metrics_json(r, path);
    const auto back = load_metrics_json(path);
    CHECK(back.mae_acc == r.mae_acc);
    CHECK(back.mae_ef == r.mae_ef);
    CHECK(std::isnan(back.mae_dep));
    CHECK(back.model_kind == "force");
    save_metrics_csv({ r }, (dir / "m.csv").string());
    std::ifstream in(dir / "m.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("mae_ef") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("angle_between_2d stays within [0, pi]")
{
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        double a[2] = { rng.normal(), rng.normal() };
        double b[2] = { rng.normal(), rng.normal() };
        const double angle = angle_between_2d(a, b);
        CHECK(angle >= 0.0);
        CHECK(angle <= 3.14159265358979312 + 1e-12);
    }
    double x[2] = { 1, 0 }, y[2] = { -2, 0 };
    CHECK(angle_between_2d(x, y) == doctest::Approx(3.14159265358979312));
}

TEST_CASE("render_field: oracle gives zero errors away from the probe")
{
    const auto law = sim::LawSpec::spring();
    data::FeatureLayout layout;
    layout.d = 2;
    const auto oracle = model::make_oracle(model::ModelKind::OracleForce, law, layout);
    GridSpec spec;
    spec.nx = spec.ny = 11;
    const auto grid = render_field(oracle, law, spec);
    int skipped = 0;
    for (int c = 0; c < grid.cells(); ++c) {
        if (grid.skipped[c]) {
            ++skipped;
            continue;
        }
        CHECK(grid.mag_err[c] <= 1e-12);
        CHECK(grid.angle_err[c] <= 1e-9);
    }
    // The default grid does not touch the origin cell here; widen the check
    // by rendering a grid centred on it.
    GridSpec hit = spec;
    hit.xmin = -1;
    hit.xmax = 1;
    hit.ymin = -1;
    hit.ymax = 1;
    const auto grid2 = render_field(oracle, law, hit);
    bool any_skipped = false;
    for (int c = 0; c < grid2.cells(); ++c)
        any_skipped = any_skipped || grid2.skipped[c];
    CHECK(any_skipped); // the (0,0) cell overlaps the probe
    (void)skipped;

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pairlearn_test_field";
    fs::create_directories(dir);
    save_field_csv(grid, (dir / "field.csv").string());
    std::ifstream in(dir / "field.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,pred_fx,pred_fy,true_fx,true_fy,mag_err,angle_err,skipped");
    fs::remove_all(dir);
}

TEST_CASE("render_field: requires a 2D non-periodic layout")
{
    data::FeatureLayout lj;
    lj.d = 3;
    lj.has_charge = false;
    lj.has_disp = true;
    const auto oracle = model::make_oracle(model::ModelKind::OracleForce,
                                           sim::LawSpec::lennard_jones(1, 1, 3), lj);
    CHECK_THROWS_AS(render_field(oracle, sim::LawSpec::lennard_jones(1, 1, 3), GridSpec{}),
                    ConfigError);
}
