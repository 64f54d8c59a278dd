#pragma once

// Command implementations behind the CLI verbs. Every command is a pure
// function of (config, input files, seeds): re-running reproduces outputs.

#include "pairlearn/config.hpp"
#include "pairlearn/dataset.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pairlearn::cli {

struct RunnerOptions {
    std::string data_root = "data"; // PAIRLEARN_DATA_ROOT overrides the default
    std::string out_root = "runs";
    bool force = false;
    int jobs = 1;
    bool jsonl = false; // simulate: also write the JSON-lines debug export
    std::optional<std::uint64_t> seed_override;
    int rep = 0; // render: which repetition's checkpoint
};

// Paths derived from the config (under data_root).
std::string trajectory_path(const RunnerOptions& opt, const DatasetConfig& dataset, int run = 0);
std::string generalization_path(const RunnerOptions& opt, const ExperimentConfig& cfg);
std::string run_dir(const RunnerOptions& opt, const ExperimentConfig& cfg);

// Builds the training dataset for a config, loading the trajectory file.
data::Dataset dataset_for(const ExperimentConfig& cfg, const RunnerOptions& opt);

void cmd_simulate(const ExperimentConfig& cfg, const RunnerOptions& opt);
void cmd_train(const ExperimentConfig& cfg, const RunnerOptions& opt);
// oracle: "" (evaluate trained checkpoints), "force" or "potential".
void cmd_evaluate(const ExperimentConfig& cfg, const RunnerOptions& opt, bool generalization,
                  const std::string& oracle = "");
void cmd_render(const ExperimentConfig& cfg, const RunnerOptions& opt,
                const std::string& oracle = "");
void cmd_sweep(const ExperimentConfig& cfg, const RunnerOptions& opt);
void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_csv);

} // namespace pairlearn::cli
