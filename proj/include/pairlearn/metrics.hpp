#pragma once

// Evaluation metrics over a test split. Absolute metrics follow the
// inter/part mean-absolute-error definitions (l1 summed over components,
// averaged over time steps and edges/nodes); each relative metric divides
// the absolute one by the mean absolute magnitude of its ground truth.
// Accumulation across steps uses pairwise summation.

#include "pairlearn/dataset.hpp"
#include "pairlearn/model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pairlearn::metrics {

inline constexpr double not_applicable = std::numeric_limits<double>::quiet_NaN();

struct MetricsReport {
    // Force suite.
    double mae_acc = not_applicable;
    double mae_ef = not_applicable;
    double mae_nf = not_applicable;
    double mae_symm_f = not_applicable;
    // Potential suite.
    double mae_dep = not_applicable;
    double mae_dnp = not_applicable;
    double mae_symm_p = not_applicable;
    // Relative forms.
    double rel_acc = not_applicable;
    double rel_ef = not_applicable;
    double rel_nf = not_applicable;
    double rel_symm_f = not_applicable;
    double rel_dep = not_applicable;
    double rel_dnp = not_applicable;
    double rel_symm_p = not_applicable;
    // Metadata.
    std::string model_kind;
    std::string dataset_name;
    std::string split_name = "test";
    std::uint64_t seed = 0;

    void validate() const; // all present entries finite and >= 0
};

// (1/|T|)(1/|E|) sum_t sum_e l1; per_item = components per edge entry.
double mae_inter(std::span<const double> pred, std::span<const double> truth, int T, int n_edges,
                 int per_item);
// Same over nodes; callers aggregate per-edge quantities to nodes first.
double mae_part(std::span<const double> pred, std::span<const double> truth, int T, int n_nodes,
                int per_item);

// Force-interpretable models: MAE_acc, MAE_ef, MAE_nf, MAE_symm_F (the
// symmetry metric uses predictions only). For models whose accelerations are
// refused on this system (per-node learnable scalars applied to a different
// node count) the acceleration entry stays NaN.
MetricsReport force_suite(const model::Model& m, const data::Dataset& dataset,
                          const std::vector<int>& steps, int jobs = 1);

// Potential models: increments measured against the designated reference
// configuration (simulation step `reference_step`, normally 0), plus
// derivative-based MAE_ef / MAE_nf and MAE_symm_P.
MetricsReport potential_suite(const model::Model& m, const data::Dataset& dataset,
                              const std::vector<int>& steps, int reference_step = 0,
                              int jobs = 1);

// Convenience: pick the suite matching the model's message interpretation.
MetricsReport evaluate_model(const model::Model& m, const data::Dataset& dataset,
                             const std::vector<int>& steps, int jobs = 1);

// Per-region statistics of predicted-minus-true pairwise potential,
// partitioned at the discontinuity radius: r < theta vs r >= theta.
struct RegionStats {
    double mean = 0.0;
    double stddev = 0.0; // population
    long count = 0;
};
struct DiscontinuityStats {
    RegionStats below; // r < theta
    RegionStats above; // r >= theta
};
DiscontinuityStats discontinuity_offset_stats(const model::Model& m, const data::Dataset& dataset,
                                              const std::vector<int>& steps, double theta);

// Same statistic over raw (distance, predicted-minus-true) samples. An empty
// region yields count 0 with zero mean/std (flagged, not an error).
DiscontinuityStats discontinuity_stats_from_samples(std::span<const double> distances,
                                                    std::span<const double> diffs, double theta);

// Serialization.
void save_metrics_json(const MetricsReport& r, const std::string& path);
void save_metrics_csv(const std::vector<MetricsReport>& reports, const std::string& path);
MetricsReport load_metrics_json(const std::string& path);

// Mean and population standard deviation per metric across repetitions.
struct Aggregate {
    MetricsReport mean;
    MetricsReport stddev;
};
Aggregate aggregate_reports(const std::vector<MetricsReport>& reports);

double pairwise_sum(std::vector<double>& values); // consumes the buffer

} // namespace pairlearn::metrics
