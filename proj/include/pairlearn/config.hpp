#pragma once

// Declarative experiment configuration. One JSON file describes the dataset
// (analytic law or the periodic LJ system), split, noise level, model,
// training hyperparameters, repetitions and optional generalization /
// field-render / sweep sections.

#include "pairlearn/field.hpp"
#include "pairlearn/laws.hpp"
#include "pairlearn/lj.hpp"
#include "pairlearn/model.hpp"
#include "pairlearn/trainer.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pairlearn::cli {

struct DatasetConfig {
    bool is_lj = false;
    // Analytic systems.
    sim::LawSpec law;
    int d = 2;
    int n_particles = 8;
    int n_steps = 10000;
    double dt = 0.01;
    // LJ systems.
    sim::LjSpec lj;
    std::uint64_t seed = 0;

    std::string id() const; // filesystem identifier, deterministic
};

struct GeneralizationConfig {
    bool present = false;
    int n_particles = 12;
    int n_steps = 1500;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::string name;
    DatasetConfig dataset;
    std::array<double, 3> split_ratios{ 0.7, 0.15, 0.15 };
    std::uint64_t split_seed = 1;
    double noise_beta = 0.0;
    std::uint64_t noise_seed = 2;
    model::ModelConfig model;
    train::TrainConfig train;
    int repetitions = 5;
    GeneralizationConfig generalization;
    bool has_field = false;
    metrics::GridSpec field;
    nlohmann::json sweep; // object: dotted key -> list of values

    nlohmann::json raw; // the parsed source, kept for sweep expansion

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

// Cross product of the sweep axes; each cell is a full config with the
// swept values substituted and a derived name.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base);

} // namespace pairlearn::cli
