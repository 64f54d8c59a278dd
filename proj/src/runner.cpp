#include "pairlearn/runner.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/metrics.hpp"
#include "pairlearn/rng.hpp"
#include "pairlearn/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace pairlearn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t effective_seed(const ExperimentConfig& cfg, const RunnerOptions& opt)
{
    return opt.seed_override.value_or(cfg.dataset.seed);
}

void ensure_dir(const std::string& path)
{
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        throw DataError("cannot create directory '" + path + "': " + ec.message());
}

void refuse_existing(const std::string& path, bool force)
{
    if (!force && fs::exists(path))
        throw DataError("output '" + path + "' exists; pass --force to overwrite");
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << text;
}

sim::Trajectory simulate_analytic(const DatasetConfig& ds, int n_particles, int n_steps,
                                  std::uint64_t seed)
{
    const auto system = sim::sample_initial_system(n_particles, ds.d, seed);
    sim::SimulateOptions options;
    options.dt = ds.dt;
    return sim::simulate(system, ds.law, n_steps, ds.d, seed, options);
}

model::Model load_rep_checkpoint(const std::string& dir, int rep)
{
    const std::string path = dir + "/rep_" + std::to_string(rep) + "/best.ckpt.json";
    if (!fs::exists(path))
        throw DataError("checkpoint '" + path + "' not found; run train first");
    return model::load_checkpoint(path);
}

void write_history_csv(const std::string& path, const train::TrainHistory& history)
{
    std::ostringstream os;
    os.precision(12);
    os << "epoch,train_loss,valid_loss\n";
    for (std::size_t e = 0; e < history.train_loss.size(); ++e)
        os << e << ',' << history.train_loss[e] << ',' << history.valid_loss[e] << '\n';
    write_text(path, os.str());
}

void write_aggregate_csv(const std::string& path, const metrics::Aggregate& agg)
{
    static const std::vector<std::pair<std::string, double metrics::MetricsReport::*>> fields = {
        { "mae_acc", &metrics::MetricsReport::mae_acc },
        { "mae_ef", &metrics::MetricsReport::mae_ef },
        { "mae_nf", &metrics::MetricsReport::mae_nf },
        { "mae_symm_f", &metrics::MetricsReport::mae_symm_f },
        { "mae_dep", &metrics::MetricsReport::mae_dep },
        { "mae_dnp", &metrics::MetricsReport::mae_dnp },
        { "mae_symm_p", &metrics::MetricsReport::mae_symm_p },
        { "rel_acc", &metrics::MetricsReport::rel_acc },
        { "rel_ef", &metrics::MetricsReport::rel_ef },
        { "rel_nf", &metrics::MetricsReport::rel_nf },
        { "rel_symm_f", &metrics::MetricsReport::rel_symm_f },
        { "rel_dep", &metrics::MetricsReport::rel_dep },
        { "rel_dnp", &metrics::MetricsReport::rel_dnp },
        { "rel_symm_p", &metrics::MetricsReport::rel_symm_p },
    };
    std::ostringstream os;
    os.precision(12);
    os << "metric,mean,std\n";
    for (const auto& [name, member] : fields) {
        const double mean = agg.mean.*member;
        if (std::isnan(mean))
            continue;
        os << name << ',' << mean << ',' << agg.stddev.*member << '\n';
    }
    write_text(path, os.str());
}

} // namespace

std::string trajectory_path(const RunnerOptions& opt, const DatasetConfig& dataset, int run)
{
    std::string id = dataset.id();
    if (dataset.is_lj)
        id += "_run" + std::to_string(run);
    return opt.data_root + "/" + id + ".plt";
}

std::string generalization_path(const RunnerOptions& opt, const ExperimentConfig& cfg)
{
    DatasetConfig gen = cfg.dataset;
    gen.n_particles = cfg.generalization.n_particles;
    gen.n_steps = cfg.generalization.n_steps;
    gen.seed = cfg.generalization.seed;
    return opt.data_root + "/" + gen.id() + "_gen.plt";
}

std::string run_dir(const RunnerOptions& opt, const ExperimentConfig& cfg)
{
    return opt.out_root + "/" + cfg.name;
}

data::Dataset dataset_for(const ExperimentConfig& cfg, const RunnerOptions& opt)
{
    const std::string path = trajectory_path(opt, cfg.dataset);
    if (!fs::exists(path))
        throw DataError("trajectory '" + path + "' not found; run simulate first");
    sim::Trajectory traj = sim::load_trajectory(path);
    const data::Topology topo = cfg.dataset.is_lj
                                    ? data::Topology::cutoff(cfg.dataset.lj.cutoff(),
                                                             cfg.dataset.lj.box_length)
                                    : data::Topology::full();
    return data::make_dataset(std::move(traj), topo, cfg.split_ratios, cfg.split_seed,
                              cfg.noise_beta, cfg.noise_seed);
}

void cmd_simulate(const ExperimentConfig& cfg, const RunnerOptions& opt)
{
    ensure_dir(opt.data_root);
    const std::uint64_t seed = effective_seed(cfg, opt);
    DatasetConfig ds = cfg.dataset;
    ds.seed = seed;

    if (ds.is_lj) {
        for (int run = 0; run < ds.lj.n_runs; ++run) {
            const std::string path = trajectory_path(opt, ds, run);
            refuse_existing(path, opt.force);
            sim::Trajectory traj = sim::simulate_lj(ds.lj, derive_seed(seed, run));
            sim::save_trajectory(traj, path);
            if (opt.jsonl)
                sim::export_trajectory_jsonl(traj, path + ".jsonl");
            std::cout << "wrote " << path << " (" << traj.steps() << " steps, " << traj.n
                      << " atoms)\n";
        }
        return;
    }

    const std::string path = trajectory_path(opt, ds);
    refuse_existing(path, opt.force);
    sim::Trajectory traj = simulate_analytic(ds, ds.n_particles, ds.n_steps, seed);
    sim::save_trajectory(traj, path);
    if (opt.jsonl)
        sim::export_trajectory_jsonl(traj, path + ".jsonl");
    std::cout << "wrote " << path << " (" << traj.steps() << " steps, " << traj.n
              << " particles, " << traj.full_edge_count() << " edges/step)\n";

    if (cfg.generalization.present) {
        const std::string gpath = generalization_path(opt, cfg);
        refuse_existing(gpath, opt.force);
        sim::Trajectory gen = simulate_analytic(ds, cfg.generalization.n_particles,
                                                cfg.generalization.n_steps,
                                                cfg.generalization.seed);
        sim::save_trajectory(gen, gpath);
        std::cout << "wrote " << gpath << " (generalization system)\n";
    }
}

void cmd_train(const ExperimentConfig& cfg, const RunnerOptions& opt)
{
    const data::Dataset dataset = dataset_for(cfg, opt);
    const std::string dir = run_dir(opt, cfg);
    refuse_existing(dir, opt.force);
    ensure_dir(dir);

    json manifest;
    manifest["name"] = cfg.name;
    manifest["trajectory"] = trajectory_path(opt, cfg.dataset);
    manifest["feature_layout"] = dataset.layout.describe();
    manifest["layout_version"] = dataset.layout.version;
    manifest["noise_beta"] = cfg.noise_beta;
    if (dataset.is_noisy())
        manifest["noise_level"] = dataset.measured_noise_level();
    manifest["repetitions"] = cfg.repetitions;
    write_text(dir + "/config.json", cfg.raw.dump(2) + "\n");

    int succeeded = 0;
    std::string last_error;
    json reps = json::array();
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::string rep_dir = dir + "/rep_" + std::to_string(rep);
        ensure_dir(rep_dir);
        model::ModelConfig mc = cfg.model;
        mc.init_seed = derive_seed(cfg.train.seed, 8000 + static_cast<std::uint64_t>(rep));
        mc.n_nodes = dataset.trajectory.n;
        train::TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.train.seed, 7000 + static_cast<std::uint64_t>(rep));
        tc.jobs = opt.jobs;

        try {
            model::Model m = model::make_model(mc, dataset.layout);
            const auto result = train::train(m, dataset, tc);
            write_history_csv(rep_dir + "/history.csv", result.history);
            model::save_checkpoint(m, rep_dir + "/best.ckpt.json", tc.seed);
            model::Model final_model = m;
            final_model.set_params(result.final_params);
            model::save_checkpoint(final_model, rep_dir + "/final.ckpt.json", tc.seed);
            json rj;
            rj["rep"] = rep;
            rj["best_epoch"] = result.history.best_epoch;
            rj["best_valid_loss"] = result.history.valid_loss.at(result.history.best_epoch);
            rj["train_seed"] = tc.seed;
            rj["init_seed"] = mc.init_seed;
            reps.push_back(rj);
            ++succeeded;
            std::cout << cfg.name << " rep " << rep << ": best epoch "
                      << result.history.best_epoch << ", valid loss "
                      << rj["best_valid_loss"].get<double>() << "\n";
        } catch (const DivergedError& e) {
            last_error = e.what();
            write_text(rep_dir + "/error.txt", std::string(e.what()) + "\n");
            json rj;
            rj["rep"] = rep;
            rj["error"] = e.what();
            reps.push_back(rj);
            std::cerr << cfg.name << " rep " << rep << " diverged: " << e.what() << "\n";
        }
    }
    manifest["reps"] = reps;
    write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
    if (succeeded == 0)
        throw DivergedError("all repetitions diverged; last error: " + last_error);
}

void cmd_evaluate(const ExperimentConfig& cfg, const RunnerOptions& opt, bool generalization,
                  const std::string& oracle)
{
    const std::string dir = run_dir(opt, cfg);
    const std::string tag = generalization ? "_generalization" : "";

    data::Dataset dataset = [&] {
        if (!generalization)
            return dataset_for(cfg, opt);
        if (!cfg.generalization.present)
            throw ConfigError("config has no generalization section");
        const std::string gpath = generalization_path(opt, cfg);
        if (!fs::exists(gpath))
            throw DataError("generalization trajectory '" + gpath +
                            "' not found; run simulate first");
        // The whole fresh simulation is the new testing dataset; a nominal
        // split is still constructed (split_timesteps requires one) but
        // evaluation runs over every step.
        sim::Trajectory traj = sim::load_trajectory(gpath);
        return data::make_dataset(std::move(traj), data::Topology::full(), cfg.split_ratios,
                                  cfg.split_seed, 0.0, 0);
    }();

    std::vector<int> eval_steps;
    if (generalization) {
        eval_steps.resize(dataset.steps());
        for (int t = 0; t < dataset.steps(); ++t)
            eval_steps[t] = t;
    } else {
        eval_steps = dataset.split.test;
    }

    if (!oracle.empty()) {
        const auto kind = oracle == "force" ? model::ModelKind::OracleForce
                                            : model::ModelKind::OraclePotential;
        const model::Model m = model::make_oracle(kind, dataset.trajectory.law, dataset.layout);
        auto report = metrics::evaluate_model(m, dataset, eval_steps, opt.jobs);
        report.dataset_name = cfg.dataset.id();
        report.split_name = generalization ? "generalization" : "test";
        ensure_dir(dir);
        const std::string path = dir + "/oracle_" + oracle + tag + ".metrics.json";
        metrics::save_metrics_json(report, path);
        std::cout << "oracle_" << oracle << ": mae_acc="
                  << (std::isnan(report.mae_acc) ? -1.0 : report.mae_acc)
                  << " mae_ef=" << report.mae_ef << " -> " << path << "\n";
        return;
    }

    if (!fs::exists(dir))
        throw DataError("run directory '" + dir + "' not found; run train first");

    std::vector<metrics::MetricsReport> reports;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::string rep_dir = dir + "/rep_" + std::to_string(rep);
        if (fs::exists(rep_dir + "/error.txt")) {
            std::cerr << "rep " << rep << " skipped (diverged during training)\n";
            continue;
        }
        const model::Model m = load_rep_checkpoint(dir, rep);
        if (!(m.layout == dataset.layout))
            throw ConfigError("checkpoint feature layout (" + m.layout.describe() +
                              ") does not match the dataset (" + dataset.layout.describe() + ")");
        if (generalization && m.kind == model::ModelKind::LearnedScale)
            std::cerr << "note: learned_scale node scalars do not transfer to a new system; "
                         "acceleration prediction refused, edge metrics reported\n";
        auto report = metrics::evaluate_model(m, dataset, eval_steps, opt.jobs);
        report.dataset_name = cfg.dataset.id();
        report.split_name = generalization ? "generalization" : "test";
        report.seed = cfg.train.seed;
        metrics::save_metrics_json(report, rep_dir + "/metrics" + tag + ".json");
        reports.push_back(report);
    }
    if (reports.empty())
        throw DataError("no repetitions to evaluate");

    metrics::save_metrics_csv(reports, dir + "/metrics" + tag + ".csv");
    const auto agg = metrics::aggregate_reports(reports);
    write_aggregate_csv(dir + "/aggregate" + tag + ".csv", agg);
    std::cout << cfg.name << tag << ": ";
    if (!std::isnan(agg.mean.mae_acc))
        std::cout << "mae_acc=" << agg.mean.mae_acc << " ";
    if (!std::isnan(agg.mean.mae_ef))
        std::cout << "mae_ef=" << agg.mean.mae_ef << " ";
    if (!std::isnan(agg.mean.mae_symm_f))
        std::cout << "mae_symm_f=" << agg.mean.mae_symm_f << " ";
    if (!std::isnan(agg.mean.mae_dep))
        std::cout << "mae_dep=" << agg.mean.mae_dep << " ";
    if (!std::isnan(agg.mean.mae_symm_p))
        std::cout << "mae_symm_p=" << agg.mean.mae_symm_p << " ";
    std::cout << "(" << reports.size() << " reps)\n";
}

void cmd_render(const ExperimentConfig& cfg, const RunnerOptions& opt, const std::string& oracle)
{
    if (cfg.dataset.is_lj)
        throw ConfigError("render: field rendering applies to 2D analytic datasets");
    data::FeatureLayout layout;
    layout.d = cfg.dataset.d;
    layout.has_charge = true;
    layout.has_disp = false;

    metrics::GridSpec grid = cfg.field; // defaults if no field section
    const std::string dir = run_dir(opt, cfg);
    ensure_dir(dir);

    if (!oracle.empty()) {
        const auto kind = oracle == "force" ? model::ModelKind::OracleForce
                                            : model::ModelKind::OraclePotential;
        const model::Model m = model::make_oracle(kind, cfg.dataset.law, layout);
        const auto field = metrics::render_field(m, cfg.dataset.law, grid);
        metrics::save_field_csv(field, dir + "/field_oracle_" + oracle + ".csv");
        std::cout << "wrote " << dir << "/field_oracle_" << oracle << ".csv\n";
        return;
    }
    const model::Model m = load_rep_checkpoint(dir, opt.rep);
    const auto field = metrics::render_field(m, cfg.dataset.law, grid);
    const std::string path = dir + "/field_rep" + std::to_string(opt.rep) + ".csv";
    metrics::save_field_csv(field, path);
    std::cout << "wrote " << path << "\n";
}

void cmd_sweep(const ExperimentConfig& cfg, const RunnerOptions& opt)
{
    const auto cells = expand_sweep(cfg);
    if (cells.size() == 1 && cfg.sweep.empty())
        throw ConfigError("sweep: config has no sweep section");
    std::cout << "sweep: " << cells.size() << " cells\n";
    for (const auto& cell : cells) {
        std::cout << "=== " << cell.name << "\n";
        cmd_train(cell, opt);
        cmd_evaluate(cell, opt, false);
    }
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_csv)
{
    // metric -> run name -> "mean±std"
    std::map<std::string, std::map<std::string, std::string>> table;
    std::vector<std::string> names;
    for (const auto& dir : run_dirs) {
        const std::string agg = dir + "/aggregate.csv";
        if (!fs::exists(agg))
            throw DataError("'" + agg + "' not found; run evaluate first");
        const std::string name = fs::path(dir).filename().string();
        names.push_back(name);
        std::ifstream in(agg);
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                continue;
            const std::string metric = line.substr(0, c1);
            const std::string mean = line.substr(c1 + 1, c2 - c1 - 1);
            const std::string std_ = line.substr(c2 + 1);
            table[metric][name] = mean + "±" + std_;
        }
    }
    std::ostringstream os;
    os << "metric";
    for (const auto& n : names)
        os << ',' << n;
    os << '\n';
    for (const auto& [metric, row] : table) {
        os << metric;
        for (const auto& n : names) {
            os << ',';
            const auto it = row.find(n);
            if (it != row.end())
                os << it->second;
        }
        os << '\n';
    }
    write_text(out_csv, os.str());
    std::cout << "wrote " << out_csv << "\n";
}

} // namespace pairlearn::cli
