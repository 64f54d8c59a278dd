#pragma once

// The model zoo. All kinds share the per-edge MLP; they differ in how edge
// messages become node accelerations:
//
//   Force              message (d-dim) is the pairwise force; node output is
//                      sum of incoming messages divided by the mass.
//   Potential          message (scalar) is the pairwise potential; node
//                      output is minus the position-gradient of the summed
//                      incoming messages, divided by the mass.
//   Baseline           learned node MLP applied to [eta_i, sum of messages].
//   LearnedScale       sum of messages divided by a learnable 10^{w_i}.
//   LearnedScaleShared one shared learnable scalar for all nodes.
//   OracleForce/       analytic law evaluated on the edge features in place
//   OraclePotential    of the edge network (ground-truth substitution).
//
// The potential-style position gradient is taken through the receiver
// position block of the edge input and, when the layout carries a
// minimum-image displacement feature, through that displacement as well
// (d disp / d r_i = -I). Outgoing messages are never differentiated with
// respect to the receiver.

#include "pairlearn/graph.hpp"
#include "pairlearn/laws.hpp"
#include "pairlearn/mlp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pairlearn::model {

enum class ModelKind {
    Force,
    Potential,
    Baseline,
    LearnedScale,
    LearnedScaleShared,
    OracleForce,
    OraclePotential,
};

std::string_view model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct Model {
    ModelKind kind = ModelKind::Force;
    int d = 2;
    data::FeatureLayout layout;
    ad::Mlp edge_net;
    ad::Mlp node_net;                 // Baseline only
    std::vector<double> node_scalars; // LearnedScale: per node; Shared: size 1
    sim::LawSpec oracle_law;          // Oracle kinds

    bool is_oracle() const
    {
        return kind == ModelKind::OracleForce || kind == ModelKind::OraclePotential;
    }
    // True when messages are d-vectors interpreted as forces.
    bool force_messages() const
    {
        return kind != ModelKind::Potential && kind != ModelKind::OraclePotential &&
               message_dim() == d;
    }
    bool potential_messages() const { return message_dim() == 1; }
    int message_dim() const;

    // Flat parameter vector: [edge_net | node_net | node_scalars].
    std::size_t n_params() const;
    void copy_params(std::span<double> out) const;
    void set_params(std::span<const double> in);
};

struct ModelConfig {
    ModelKind kind = ModelKind::Force;
    std::vector<int> hidden{ 300, 300, 300, 300 };
    ad::Activation activation = ad::Activation::SiLU;
    // Baseline only: "force" (messages are d-dim) or "potential" (scalar).
    bool scalar_messages = false;
    std::uint64_t init_seed = 0;
    int n_nodes = 0; // LearnedScale needs the node count of the training system
};

// Validates the configuration (ReLU is rejected for potential-style message
// gradients; LeakyReLU is permitted with a warning on stderr).
Model make_model(const ModelConfig& config, const data::FeatureLayout& layout);

Model make_oracle(ModelKind kind, const sim::LawSpec& law, const data::FeatureLayout& layout);

// Scratch. One per thread.
struct ModelWork {
    ad::MlpWork edge_work;
    ad::MlpWork node_work;
    std::vector<double> buf; // misc per-call scratch
};

struct Prediction {
    std::vector<double> accelerations; // [i][d]; empty if skipped
    std::vector<double> messages;      // [e][message_dim]
    std::vector<double> forces;        // [e][d] claimed pairwise force
    std::vector<double> potentials;    // [e], scalar-message models only
};

// Full forward evaluation. skip_acceleration supports evaluating
// LearnedScale checkpoints on systems with a different node count, where
// per-node scalars do not transfer and acceleration prediction is refused.
Prediction predict(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                   bool skip_acceleration = false);

// Applies the edge network (or oracle law) to every directed edge.
void edge_messages(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                   std::vector<double>& messages);

// Deterministic node operators, exposed for tests.
void node_operator_force(std::span<const double> messages, const data::GraphSnapshot& snap,
                         std::span<double> acc_out);
void node_operator_potential(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                             std::span<double> acc_out,
                             std::vector<double>* pair_forces = nullptr);

// Oracle evaluation of one edge-input vector: claimed pairwise force and,
// for OraclePotential, the potential (force obtained by differentiating the
// law's potential expression). force_out has d components.
void oracle_pairwise(const Model& m, std::span<const double> edge_input, double* force_out,
                     double* potential_out);

// Per-snapshot loss + gradient accumulation into a flat gradient vector
// laid out like Model::copy_params. Contributions are scaled by `weight`
// (typically 1/batch_size). Returns the snapshot's acceleration loss term
// (1/|V| sum_i l1) and the symmetry term (1/|E| sum_e l1(M_e + M_rev(e)),
// zero unless alpha > 0).
struct SnapshotLoss {
    double acceleration = 0.0;
    double symmetry = 0.0;
    double total(double alpha) const { return acceleration + alpha * symmetry; }
};
SnapshotLoss model_backward(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                            std::span<double> grad, double weight, double alpha);

// Forward-only acceleration loss of one snapshot: (1/|V|) sum_i l1.
double snapshot_loss(const Model& m, const data::GraphSnapshot& snap, ModelWork& work);

// Checkpoint io (JSON container with layout descriptor and RNG seed record).
void save_checkpoint(const Model& m, const std::string& path, std::uint64_t rng_seed_record);
Model load_checkpoint(const std::string& path);

} // namespace pairlearn::model
