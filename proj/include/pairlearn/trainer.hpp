#pragma once

// Minibatch Adam training against the acceleration loss (optionally with the
// edge-symmetry regularizer), shuffling time steps each epoch and selecting
// the checkpoint with the best validation loss.
//
// The minibatch unit is one time step: all nodes and edges of a snapshot
// enter together, and the batch loss is the mean of per-snapshot losses.

#include "pairlearn/dataset.hpp"
#include "pairlearn/model.hpp"

#include <cstdint>
#include <vector>

namespace pairlearn::train {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 32; // paper-style default; potential runs use 8
    int max_epochs = 200;
    std::uint64_t seed = 0;
    double alpha = 0.0;     // symmetry-regularization weight; 0 disables
    double grad_clip = 0.0; // global L2 clip; 0 disables
    int jobs = 1;
    bool verbose = false;
};

struct TrainHistory {
    std::vector<double> train_loss; // per-epoch mean batch objective
    std::vector<double> valid_loss; // per-epoch validation acceleration loss
    int best_epoch = -1;            // argmin of valid_loss
    std::uint64_t seed = 0;
};

struct TrainResult {
    TrainHistory history;
    std::vector<double> best_params;
    std::vector<double> final_params;
};

// Trains in place; on return the model holds the validation-best parameters.
// Model selection always uses the plain acceleration loss, even when
// training with alpha > 0.
TrainResult train(model::Model& m, const data::Dataset& dataset, const TrainConfig& config);

// Mean acceleration loss over the given steps (clean targets are used only
// if `clean_targets`; training/validation use the dataset's training
// targets).
double mean_loss(const model::Model& m, const data::Dataset& dataset,
                 const std::vector<int>& steps, int jobs, bool clean_targets = false);

} // namespace pairlearn::train
