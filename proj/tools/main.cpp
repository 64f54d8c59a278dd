#include "pairlearn/errors.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

using namespace pairlearn;

int main(int argc, char** argv)
{
    CLI::App app{ "pairlearn: learn pairwise particle interactions from trajectories" };
    app.require_subcommand(1);

    cli::RunnerOptions opt;
    if (const char* env = std::getenv("PAIRLEARN_DATA_ROOT"))
        opt.data_root = env;
    opt.jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (opt.jobs < 1)
        opt.jobs = 1;

    std::string config_path;
    std::string kernels = "auto";
    std::uint64_t seed_flag = 0;
    bool seed_set = false;

    const auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        if (needs_config)
            cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--out", opt.out_root, "run directory root")->capture_default_str();
        cmd->add_option("--data-root", opt.data_root, "trajectory/data root")
            ->capture_default_str();
        cmd->add_flag("--force", opt.force, "overwrite existing outputs");
        cmd->add_option("--jobs", opt.jobs, "worker threads")->capture_default_str();
        cmd->add_option("--kernels", kernels, "kernel backend: auto|scalar|avx2")
            ->capture_default_str();
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t s) { seed_flag = s; seed_set = true; },
            "override the dataset simulation seed");
    };

    auto* c_sim = app.add_subcommand("simulate", "generate ground-truth trajectories");
    add_common(c_sim);
    c_sim->add_flag("--jsonl", opt.jsonl, "also write a JSON-lines debug export");

    auto* c_train = app.add_subcommand("train", "train the configured model");
    add_common(c_train);

    auto* c_eval = app.add_subcommand("evaluate", "evaluate checkpoints on the test split");
    add_common(c_eval);
    bool gen = false;
    std::string oracle;
    c_eval->add_flag("--generalization", gen, "evaluate on the generalization system");
    c_eval->add_option("--oracle", oracle, "evaluate the analytic oracle: force|potential")
        ->check(CLI::IsMember({ "force", "potential" }));

    auto* c_render = app.add_subcommand("render", "render the interaction field to CSV");
    add_common(c_render);
    std::string render_oracle;
    c_render->add_option("--rep", opt.rep, "repetition checkpoint to render")
        ->capture_default_str();
    c_render->add_option("--oracle", render_oracle, "render the analytic oracle instead")
        ->check(CLI::IsMember({ "force", "potential" }));

    auto* c_sweep = app.add_subcommand("sweep", "train+evaluate every sweep cell");
    add_common(c_sweep);

    auto* c_report = app.add_subcommand("report", "tabulate aggregate metrics of run dirs");
    std::vector<std::string> run_dirs;
    std::string report_out = "report.csv";
    c_report->add_option("--runs", run_dirs, "run directories")->required()->expected(-1);
    c_report->add_option("--out", report_out, "output CSV path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        kern::force_backend(kernels);
        if (seed_set)
            opt.seed_override = seed_flag;

        if (c_report->parsed()) {
            cli::cmd_report(run_dirs, report_out);
            return exit_ok;
        }

        const auto cfg = cli::ExperimentConfig::from_file(config_path);
        if (c_sim->parsed())
            cli::cmd_simulate(cfg, opt);
        else if (c_train->parsed())
            cli::cmd_train(cfg, opt);
        else if (c_eval->parsed())
            cli::cmd_evaluate(cfg, opt, gen, oracle);
        else if (c_render->parsed())
            cli::cmd_render(cfg, opt, render_oracle);
        else if (c_sweep->parsed())
            cli::cmd_sweep(cfg, opt);
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
