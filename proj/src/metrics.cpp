#include "pairlearn/metrics.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/lj.hpp"
#include "pairlearn/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace pairlearn::metrics {

using nlohmann::json;

double pairwise_sum(std::vector<double>& values)
{
    if (values.empty())
        return 0.0;
    std::size_t n = values.size();
    while (n > 1) {
        const std::size_t half = n / 2;
        for (std::size_t i = 0; i < half; ++i)
            values[i] = values[2 * i] + values[2 * i + 1];
        if (n % 2 == 1)
            values[half] = values[n - 1];
        n = half + n % 2;
    }
    return values[0];
}

void MetricsReport::validate() const
{
    const auto check = [](double v) {
        if (!std::isnan(v) && (!std::isfinite(v) || v < 0.0))
            throw InvariantViolation("metrics report entry is negative or non-finite");
    };
    for (double v : { mae_acc, mae_ef, mae_nf, mae_symm_f, mae_dep, mae_dnp, mae_symm_p, rel_acc,
                      rel_ef, rel_nf, rel_symm_f, rel_dep, rel_dnp, rel_symm_p })
        check(v);
}

namespace {

double l1(const double* a, const double* b, int n)
{
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
        acc += std::fabs(a[k] - b[k]);
    return acc;
}

double l1_mag(const double* a, int n)
{
    double acc = 0.0;
    for (int k = 0; k < n; ++k)
        acc += std::fabs(a[k]);
    return acc;
}

// Per-step accumulator reduced with pairwise summation at the end.
struct StepSums {
    std::vector<double> values;
    void add(double v) { values.push_back(v); }
    double mean()
    {
        const std::size_t n = values.size();
        return n ? pairwise_sum(values) / static_cast<double>(n) : 0.0;
    }
};

double ratio_or_nan(double num, double denom)
{
    if (std::isnan(num) || denom == 0.0)
        return not_applicable;
    return num / denom;
}

// Edge input for an arbitrary ordered pair at a given step, regardless of
// whether the pair is within the cutoff (used for the reference
// configuration of potential increments).
std::vector<double> pair_edge_input(const data::Dataset& ds, int t, int i, int j)
{
    const auto& layout = ds.layout;
    const int d = layout.d;
    const int node_len = layout.node_len();
    const auto pos = ds.feature_positions(t);
    const auto vel = ds.feature_velocities(t);
    std::vector<double> x(layout.edge_input_len());
    const auto fill_node = [&](int node, int at) {
        for (int k = 0; k < d; ++k)
            x[at + k] = pos[static_cast<std::size_t>(node) * d + k];
        for (int k = 0; k < d; ++k)
            x[at + d + k] = vel[static_cast<std::size_t>(node) * d + k];
        int off = at + 2 * d;
        if (layout.has_charge)
            x[off++] = ds.trajectory.charges[node];
        x[off] = ds.trajectory.masses[node];
    };
    fill_node(i, 0);
    fill_node(j, node_len);
    if (layout.has_disp) {
        double disp[3];
        sim::minimum_image(pos.data() + static_cast<std::size_t>(i) * d,
                           pos.data() + static_cast<std::size_t>(j) * d, ds.topology.box, d, disp);
        for (int k = 0; k < d; ++k)
            x[layout.disp_offset() + k] = disp[k];
    }
    return x;
}

} // namespace

double mae_inter(std::span<const double> pred, std::span<const double> truth, int T, int n_edges,
                 int per_item)
{
    const std::size_t expect = static_cast<std::size_t>(T) * n_edges * per_item;
    if (pred.size() != expect || truth.size() != expect)
        throw ConfigError("mae_inter: shape mismatch");
    std::vector<double> sums;
    sums.reserve(static_cast<std::size_t>(T) * n_edges);
    for (std::size_t e = 0; e < static_cast<std::size_t>(T) * n_edges; ++e)
        sums.push_back(l1(pred.data() + e * per_item, truth.data() + e * per_item, per_item));
    return pairwise_sum(sums) / (static_cast<double>(T) * n_edges);
}

double mae_part(std::span<const double> pred, std::span<const double> truth, int T, int n_nodes,
                int per_item)
{
    return mae_inter(pred, truth, T, n_nodes, per_item);
}

MetricsReport force_suite(const model::Model& m, const data::Dataset& dataset,
                          const std::vector<int>& steps, int jobs)
{
    if (m.message_dim() != dataset.trajectory.d)
        throw ConfigError("force_suite: model does not produce force-interpretable messages");
    const int d = dataset.trajectory.d;
    const int n = dataset.trajectory.n;
    const int T = static_cast<int>(steps.size());
    if (T == 0)
        throw ConfigError("force_suite: empty step set");

    const bool acc_refused = (m.kind == model::ModelKind::LearnedScale &&
                              static_cast<int>(m.node_scalars.size()) != n);

    struct PerStep {
        double acc_err, acc_mag, ef_err, f_mag, nf_err, nf_mag, symm;
    };
    std::vector<PerStep> rows(T);
    const int used_jobs = std::max(jobs, 1);
    std::vector<model::ModelWork> work(used_jobs);

    parallel_chunks(T, used_jobs, [&](int c, int begin, int end) {
        std::vector<double> truth(static_cast<std::size_t>(1) * d);
        std::vector<double> net_pred(static_cast<std::size_t>(n) * d);
        std::vector<double> net_true(static_cast<std::size_t>(n) * d);
        for (int idx = begin; idx < end; ++idx) {
            const int t = steps[idx];
            const auto snap = dataset.eval_snapshot(t);
            const auto pred = model::predict(m, snap, work[c], acc_refused);
            PerStep row{};
            if (!acc_refused) {
                double err = 0.0;
                for (std::size_t i = 0; i < pred.accelerations.size(); ++i)
                    err += std::fabs(pred.accelerations[i] - snap.target_acc[i]);
                row.acc_err = err / n;
                row.acc_mag = l1_mag(snap.target_acc.data(), n * d) / n;
            }
            const int E = snap.n_edges();
            std::fill(net_pred.begin(), net_pred.end(), 0.0);
            std::fill(net_true.begin(), net_true.end(), 0.0);
            double ef = 0.0, fmag = 0.0, symm = 0.0;
            for (int e = 0; e < E; ++e) {
                const auto [i, j] = snap.edges[e];
                dataset.trajectory.edge_force(t, i, j, truth.data());
                const double* f_hat = pred.forces.data() + static_cast<std::size_t>(e) * d;
                ef += l1(f_hat, truth.data(), d);
                fmag += l1_mag(truth.data(), d);
                const double* f_rev =
                    pred.forces.data() + static_cast<std::size_t>(snap.reverse_edge[e]) * d;
                for (int k = 0; k < d; ++k) {
                    symm += std::fabs(f_hat[k] + f_rev[k]);
                    net_pred[static_cast<std::size_t>(i) * d + k] += f_hat[k];
                    net_true[static_cast<std::size_t>(i) * d + k] += truth[k];
                }
            }
            row.ef_err = ef / E;
            row.f_mag = fmag / E;
            row.symm = symm / E;
            row.nf_err = l1(net_pred.data(), net_true.data(), n * d) / n;
            row.nf_mag = l1_mag(net_true.data(), n * d) / n;
            rows[idx] = row;
        }
    });

    StepSums acc_err, acc_mag, ef_err, f_mag, nf_err, nf_mag, symm;
    for (const auto& r : rows) {
        acc_err.add(r.acc_err);
        acc_mag.add(r.acc_mag);
        ef_err.add(r.ef_err);
        f_mag.add(r.f_mag);
        nf_err.add(r.nf_err);
        nf_mag.add(r.nf_mag);
        symm.add(r.symm);
    }

    MetricsReport rep;
    rep.model_kind = std::string(model::model_kind_name(m.kind));
    if (!acc_refused) {
        rep.mae_acc = acc_err.mean();
        rep.rel_acc = ratio_or_nan(rep.mae_acc, acc_mag.mean());
    }
    rep.mae_ef = ef_err.mean();
    rep.mae_nf = nf_err.mean();
    rep.mae_symm_f = symm.mean();
    const double fm = f_mag.mean();
    rep.rel_ef = ratio_or_nan(rep.mae_ef, fm);
    rep.rel_symm_f = ratio_or_nan(rep.mae_symm_f, fm);
    rep.rel_nf = ratio_or_nan(rep.mae_nf, nf_mag.mean());
    rep.validate();
    return rep;
}

MetricsReport potential_suite(const model::Model& m, const data::Dataset& dataset,
                              const std::vector<int>& steps, int reference_step, int jobs)
{
    if (m.message_dim() != 1)
        throw ConfigError("potential_suite: model does not produce scalar messages");
    const int d = dataset.trajectory.d;
    const int n = dataset.trajectory.n;
    const int T = static_cast<int>(steps.size());
    if (T == 0)
        throw ConfigError("potential_suite: empty step set");
    if (reference_step < 0 || reference_step >= dataset.steps())
        throw ConfigError("potential_suite: reference step outside the dataset");

    // Reference configuration: predicted and true potentials for every
    // ordered pair, whether or not it is inside the cutoff at the reference
    // step.
    std::vector<double> ref_pred(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> ref_true(static_cast<std::size_t>(n) * n, 0.0);
    {
        model::ModelWork work;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                ref_true[static_cast<std::size_t>(i) * n + j] =
                    dataset.trajectory.edge_potential(reference_step, i, j);
                if (!m.is_oracle()) {
                    const auto x = pair_edge_input(dataset, reference_step, i, j);
                    double p_hat;
                    ad::mlp_forward(m.edge_net, x, work.edge_work, { &p_hat, 1 });
                    ref_pred[static_cast<std::size_t>(i) * n + j] = p_hat;
                }
            }
        if (m.is_oracle())
            ref_pred = ref_true; // the oracle evaluates the law itself
    }

    const bool acc_refused = false;
    struct PerStep {
        double acc_err, acc_mag, dep_err, dep_mag, dnp_err, dnp_mag, symm, p_mag, ef_err, f_mag,
            nf_err, nf_mag;
    };
    std::vector<PerStep> rows(T);
    const int used_jobs = std::max(jobs, 1);
    std::vector<model::ModelWork> work(used_jobs);

    parallel_chunks(T, used_jobs, [&](int c, int begin, int end) {
        std::vector<double> truth(static_cast<std::size_t>(1) * d);
        std::vector<double> node_dp_pred(n), node_dp_true(n);
        std::vector<double> net_pred(static_cast<std::size_t>(n) * d);
        std::vector<double> net_true(static_cast<std::size_t>(n) * d);
        for (int idx = begin; idx < end; ++idx) {
            const int t = steps[idx];
            const auto snap = dataset.eval_snapshot(t);
            const auto pred = model::predict(m, snap, work[c], acc_refused);
            PerStep row{};
            {
                double err = 0.0;
                for (std::size_t i = 0; i < pred.accelerations.size(); ++i)
                    err += std::fabs(pred.accelerations[i] - snap.target_acc[i]);
                row.acc_err = err / n;
                row.acc_mag = l1_mag(snap.target_acc.data(), n * d) / n;
            }
            const int E = snap.n_edges();
            std::fill(node_dp_pred.begin(), node_dp_pred.end(), 0.0);
            std::fill(node_dp_true.begin(), node_dp_true.end(), 0.0);
            std::fill(net_pred.begin(), net_pred.end(), 0.0);
            std::fill(net_true.begin(), net_true.end(), 0.0);
            double dep = 0.0, dep_mag = 0.0, symm = 0.0, p_mag = 0.0, ef = 0.0, fmag = 0.0;
            for (int e = 0; e < E; ++e) {
                const auto [i, j] = snap.edges[e];
                const double p_hat = pred.potentials[e];
                const double p_true = dataset.trajectory.edge_potential(t, i, j);
                const double dp_hat = p_hat - ref_pred[static_cast<std::size_t>(i) * n + j];
                const double dp_true = p_true - ref_true[static_cast<std::size_t>(i) * n + j];
                dep += std::fabs(dp_hat - dp_true);
                dep_mag += std::fabs(dp_true);
                node_dp_pred[i] += dp_hat;
                node_dp_true[i] += dp_true;
                symm += std::fabs(p_hat - pred.potentials[snap.reverse_edge[e]]);
                p_mag += std::fabs(p_true);

                dataset.trajectory.edge_force(t, i, j, truth.data());
                const double* f_hat = pred.forces.data() + static_cast<std::size_t>(e) * d;
                ef += l1(f_hat, truth.data(), d);
                fmag += l1_mag(truth.data(), d);
                for (int k = 0; k < d; ++k) {
                    net_pred[static_cast<std::size_t>(i) * d + k] += f_hat[k];
                    net_true[static_cast<std::size_t>(i) * d + k] += truth[k];
                }
            }
            row.dep_err = dep / E;
            row.dep_mag = dep_mag / E;
            row.symm = symm / E;
            row.p_mag = p_mag / E;
            row.ef_err = ef / E;
            row.f_mag = fmag / E;
            row.dnp_err = l1(node_dp_pred.data(), node_dp_true.data(), n) / n;
            row.dnp_mag = l1_mag(node_dp_true.data(), n) / n;
            row.nf_err = l1(net_pred.data(), net_true.data(), n * d) / n;
            row.nf_mag = l1_mag(net_true.data(), n * d) / n;
            rows[idx] = row;
        }
    });

    StepSums acc_err, acc_mag, dep_err, dep_mag, dnp_err, dnp_mag, symm, p_mag, ef_err, f_mag,
        nf_err, nf_mag;
    for (const auto& r : rows) {
        acc_err.add(r.acc_err);
        acc_mag.add(r.acc_mag);
        dep_err.add(r.dep_err);
        dep_mag.add(r.dep_mag);
        dnp_err.add(r.dnp_err);
        dnp_mag.add(r.dnp_mag);
        symm.add(r.symm);
        p_mag.add(r.p_mag);
        ef_err.add(r.ef_err);
        f_mag.add(r.f_mag);
        nf_err.add(r.nf_err);
        nf_mag.add(r.nf_mag);
    }

    MetricsReport rep;
    rep.model_kind = std::string(model::model_kind_name(m.kind));
    rep.mae_acc = acc_err.mean();
    rep.rel_acc = ratio_or_nan(rep.mae_acc, acc_mag.mean());
    rep.mae_dep = dep_err.mean();
    rep.rel_dep = ratio_or_nan(rep.mae_dep, dep_mag.mean());
    rep.mae_dnp = dnp_err.mean();
    rep.rel_dnp = ratio_or_nan(rep.mae_dnp, dnp_mag.mean());
    rep.mae_symm_p = symm.mean();
    rep.rel_symm_p = ratio_or_nan(rep.mae_symm_p, p_mag.mean());
    rep.mae_ef = ef_err.mean();
    rep.mae_nf = nf_err.mean();
    const double fm = f_mag.mean();
    rep.rel_ef = ratio_or_nan(rep.mae_ef, fm);
    rep.rel_nf = ratio_or_nan(rep.mae_nf, nf_mag.mean());
    rep.validate();
    return rep;
}

MetricsReport evaluate_model(const model::Model& m, const data::Dataset& dataset,
                             const std::vector<int>& steps, int jobs)
{
    return m.message_dim() == 1 ? potential_suite(m, dataset, steps, 0, jobs)
                                : force_suite(m, dataset, steps, jobs);
}

namespace {

// Welford accumulator per region.
struct RegionAcc {
    long count = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x)
    {
        ++count;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
    RegionStats stats() const
    {
        return { count > 0 ? mean : 0.0, count > 0 ? std::sqrt(m2 / count) : 0.0, count };
    }
};

} // namespace

DiscontinuityStats discontinuity_stats_from_samples(std::span<const double> distances,
                                                    std::span<const double> diffs, double theta)
{
    if (distances.size() != diffs.size())
        throw ConfigError("discontinuity_stats_from_samples: shape mismatch");
    RegionAcc below, above;
    for (std::size_t i = 0; i < distances.size(); ++i)
        (distances[i] < theta ? below : above).add(diffs[i]);
    return { below.stats(), above.stats() };
}

DiscontinuityStats discontinuity_offset_stats(const model::Model& m, const data::Dataset& dataset,
                                              const std::vector<int>& steps, double theta)
{
    if (m.message_dim() != 1)
        throw ConfigError("discontinuity_offset_stats: requires a potential model");
    const int d = dataset.trajectory.d;
    model::ModelWork work;
    RegionAcc below, above;

    for (int t : steps) {
        const auto snap = dataset.eval_snapshot(t);
        const auto pred = model::predict(m, snap, work, true);
        const auto pos = dataset.trajectory.pos(t);
        for (int e = 0; e < snap.n_edges(); ++e) {
            const auto [i, j] = snap.edges[e];
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dx = pos[static_cast<std::size_t>(j) * d + k] -
                                  pos[static_cast<std::size_t>(i) * d + k];
                r2 += dx * dx;
            }
            const double diff = pred.potentials[e] - dataset.trajectory.edge_potential(t, i, j);
            (std::sqrt(r2) < theta ? below : above).add(diff);
        }
    }
    return { below.stats(), above.stats() };
}

namespace {

json report_to_json(const MetricsReport& r)
{
    const auto put = [](json& j, const char* key, double v) {
        if (std::isnan(v))
            j[key] = nullptr;
        else
            j[key] = v;
    };
    json j;
    put(j, "mae_acc", r.mae_acc);
    put(j, "mae_ef", r.mae_ef);
    put(j, "mae_nf", r.mae_nf);
    put(j, "mae_symm_f", r.mae_symm_f);
    put(j, "mae_dep", r.mae_dep);
    put(j, "mae_dnp", r.mae_dnp);
    put(j, "mae_symm_p", r.mae_symm_p);
    put(j, "rel_acc", r.rel_acc);
    put(j, "rel_ef", r.rel_ef);
    put(j, "rel_nf", r.rel_nf);
    put(j, "rel_symm_f", r.rel_symm_f);
    put(j, "rel_dep", r.rel_dep);
    put(j, "rel_dnp", r.rel_dnp);
    put(j, "rel_symm_p", r.rel_symm_p);
    j["model_kind"] = r.model_kind;
    j["dataset"] = r.dataset_name;
    j["split"] = r.split_name;
    j["seed"] = r.seed;
    return j;
}

double json_metric(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return not_applicable;
    return j.at(key).get<double>();
}

const std::vector<std::pair<std::string, double MetricsReport::*>>& metric_fields()
{
    static const std::vector<std::pair<std::string, double MetricsReport::*>> fields = {
        { "mae_acc", &MetricsReport::mae_acc },       { "mae_ef", &MetricsReport::mae_ef },
        { "mae_nf", &MetricsReport::mae_nf },         { "mae_symm_f", &MetricsReport::mae_symm_f },
        { "mae_dep", &MetricsReport::mae_dep },       { "mae_dnp", &MetricsReport::mae_dnp },
        { "mae_symm_p", &MetricsReport::mae_symm_p }, { "rel_acc", &MetricsReport::rel_acc },
        { "rel_ef", &MetricsReport::rel_ef },         { "rel_nf", &MetricsReport::rel_nf },
        { "rel_symm_f", &MetricsReport::rel_symm_f }, { "rel_dep", &MetricsReport::rel_dep },
        { "rel_dnp", &MetricsReport::rel_dnp },       { "rel_symm_p", &MetricsReport::rel_symm_p },
    };
    return fields;
}

} // namespace

void save_metrics_json(const MetricsReport& r, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << report_to_json(r).dump(2) << '\n';
}

MetricsReport load_metrics_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open metrics '" + path + "'");
    json j;
    in >> j;
    MetricsReport r;
    for (const auto& [name, member] : metric_fields())
        r.*member = json_metric(j, name.c_str());
    r.model_kind = j.value("model_kind", "");
    r.dataset_name = j.value("dataset", "");
    r.split_name = j.value("split", "test");
    r.seed = j.value("seed", 0ull);
    return r;
}

void save_metrics_csv(const std::vector<MetricsReport>& reports, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << "model_kind,dataset,split,seed";
    for (const auto& [name, member] : metric_fields())
        out << ',' << name;
    out << '\n';
    out.precision(12);
    for (const auto& r : reports) {
        out << r.model_kind << ',' << r.dataset_name << ',' << r.split_name << ',' << r.seed;
        for (const auto& [name, member] : metric_fields()) {
            out << ',';
            const double v = r.*member;
            if (!std::isnan(v))
                out << v;
        }
        out << '\n';
    }
}

Aggregate aggregate_reports(const std::vector<MetricsReport>& reports)
{
    if (reports.empty())
        throw ConfigError("aggregate_reports: no reports");
    Aggregate agg;
    agg.mean = reports.front();
    agg.stddev = reports.front();
    for (const auto& [name, member] : metric_fields()) {
        double sum = 0.0;
        long count = 0;
        for (const auto& r : reports) {
            const double v = r.*member;
            if (!std::isnan(v)) {
                sum += v;
                ++count;
            }
        }
        if (count == 0) {
            agg.mean.*member = not_applicable;
            agg.stddev.*member = not_applicable;
            continue;
        }
        const double mean = sum / count;
        double var = 0.0;
        for (const auto& r : reports) {
            const double v = r.*member;
            if (!std::isnan(v))
                var += (v - mean) * (v - mean);
        }
        agg.mean.*member = mean;
        agg.stddev.*member = std::sqrt(var / count); // population
    }
    return agg;
}

} // namespace pairlearn::metrics
