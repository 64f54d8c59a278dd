#include "pairlearn/trainer.hpp"

#include "pairlearn/adam.hpp"
#include "pairlearn/errors.hpp"
#include "pairlearn/parallel.hpp"
#include "pairlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace pairlearn::train {

namespace {

double l2_norm(std::span<const double> v)
{
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return std::sqrt(acc);
}

} // namespace

double mean_loss(const model::Model& m, const data::Dataset& dataset,
                 const std::vector<int>& steps, int jobs, bool clean_targets)
{
    if (steps.empty())
        return 0.0;
    const int n = static_cast<int>(steps.size());
    std::vector<double> partial(std::max(jobs, 1), 0.0);
    std::vector<model::ModelWork> work(std::max(jobs, 1));
    parallel_chunks(n, jobs, [&](int c, int begin, int end) {
        for (int idx = begin; idx < end; ++idx) {
            const auto snap = clean_targets ? dataset.eval_snapshot(steps[idx])
                                            : dataset.snapshot(steps[idx]);
            partial[c] += model::snapshot_loss(m, snap, work[c]);
        }
    });
    double total = 0.0;
    for (double p : partial)
        total += p;
    return total / n;
}

TrainResult train(model::Model& m, const data::Dataset& dataset, const TrainConfig& config)
{
    if (config.learning_rate < 0.0)
        throw ConfigError("train: learning rate must be non-negative");
    if (config.batch_size < 1)
        throw ConfigError("train: batch size must be at least 1");
    if (config.max_epochs < 1)
        throw ConfigError("train: need at least one epoch");
    if (config.alpha < 0.0)
        throw ConfigError("train: alpha must be non-negative");
    if (m.is_oracle())
        throw ConfigError("train: oracle models have no trainable parameters");
    if (config.alpha > 0.0 && m.message_dim() != m.d)
        throw ConfigError("train: symmetry regularization requires force-interpretable "
                          "(d-dimensional) messages");
    if (!(dataset.layout == m.layout))
        throw ConfigError("train: dataset feature layout does not match the model");

    const std::vector<int> train_steps = dataset.train_steps();
    if (train_steps.empty())
        throw ConfigError("train: empty training split");
    const int jobs = std::max(config.jobs, 1);

    const std::size_t n_params = m.n_params();
    std::vector<double> params(n_params);
    m.copy_params(params);
    std::vector<double> grad(n_params);
    std::vector<std::vector<double>> thread_grad(jobs, std::vector<double>(n_params));
    std::vector<model::SnapshotLoss> thread_loss(jobs);
    std::vector<model::ModelWork> work(jobs);
    AdamState adam(n_params);

    TrainResult result;
    result.history.seed = config.seed;
    double best_valid = std::numeric_limits<double>::infinity();

    std::vector<int> order = train_steps;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
            const int j =
                static_cast<int>(shuffle_rng.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        int n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const int B = static_cast<int>(
                std::min<std::size_t>(config.batch_size, order.size() - start));
            const double weight = 1.0 / B;
            for (auto& g : thread_grad)
                std::fill(g.begin(), g.end(), 0.0);
            std::fill(thread_loss.begin(), thread_loss.end(), model::SnapshotLoss{});

            parallel_chunks(B, jobs, [&](int c, int begin, int end) {
                for (int b = begin; b < end; ++b) {
                    const auto snap = dataset.snapshot(order[start + b]);
                    const auto l =
                        model::model_backward(m, snap, work[c], thread_grad[c], weight,
                                              config.alpha);
                    thread_loss[c].acceleration += l.acceleration;
                    thread_loss[c].symmetry += l.symmetry;
                }
            });

            std::fill(grad.begin(), grad.end(), 0.0);
            for (int c = 0; c < jobs; ++c)
                for (std::size_t i = 0; i < n_params; ++i)
                    grad[i] += thread_grad[c][i];
            model::SnapshotLoss batch_loss;
            for (const auto& l : thread_loss) {
                batch_loss.acceleration += l.acceleration;
                batch_loss.symmetry += l.symmetry;
            }
            const double objective = batch_loss.total(config.alpha) / B;
            if (!std::isfinite(objective))
                throw DivergedError(
                    "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                        ", batch " + std::to_string(n_batches) +
                        ", |params|=" + std::to_string(l2_norm(params)) +
                        ", |grad|=" + std::to_string(l2_norm(grad)),
                    epoch);

            if (config.grad_clip > 0.0) {
                const double gnorm = l2_norm(grad);
                if (gnorm > config.grad_clip) {
                    const double scale = config.grad_clip / gnorm;
                    for (auto& g : grad)
                        g *= scale;
                }
            }
            adam_step(params, grad, adam, config.learning_rate);
            m.set_params(params);
            epoch_loss += objective;
            ++n_batches;
        }

        const double valid = mean_loss(m, dataset, dataset.split.valid, jobs);
        result.history.train_loss.push_back(epoch_loss / std::max(n_batches, 1));
        result.history.valid_loss.push_back(valid);
        if (valid < best_valid) {
            best_valid = valid;
            result.history.best_epoch = epoch;
            result.best_params = params;
        }
        if (config.verbose)
            std::cerr << "epoch " << epoch << " train " << result.history.train_loss.back()
                      << " valid " << valid << "\n";
    }

    result.final_params = params;
    if (result.best_params.empty())
        result.best_params = params;
    m.set_params(result.best_params);
    return result;
}

} // namespace pairlearn::train
