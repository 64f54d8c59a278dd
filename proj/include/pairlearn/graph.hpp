#pragma once

// Turns one trajectory frame into a learning-ready graph: directed edge
// list (full or cutoff topology), per-node features, per-edge input vectors
// in a fixed documented order, and target accelerations.
//
// Node features: [r (d), rdot (d), q (optional), m].
// Edge input:    [eta_receiver, eta_sender, minimum-image displacement
//                 (optional, cutoff topologies only)].

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pairlearn::data {

struct FeatureLayout {
    int version = 1;
    int d = 2;
    bool has_charge = true; // analytic systems
    bool has_disp = false;  // periodic cutoff systems

    int node_len() const { return 2 * d + 1 + (has_charge ? 1 : 0); }
    int edge_input_len() const { return 2 * node_len() + (has_disp ? d : 0); }
    int recv_pos_offset() const { return 0; }
    int send_pos_offset() const { return node_len(); }
    int disp_offset() const { return has_disp ? 2 * node_len() : -1; }

    bool operator==(const FeatureLayout&) const = default;
    std::string describe() const;
};

struct Topology {
    enum class Kind { Full, Cutoff } kind = Kind::Full;
    double r_cut = 0.0;
    double box = 0.0; // required for Cutoff

    static Topology full() { return {}; }
    static Topology cutoff(double r_cut, double box);
};

struct GraphSnapshot {
    int n_nodes = 0;
    int d = 0;
    FeatureLayout layout;
    std::vector<std::pair<int, int>> edges; // (receiver i, sender j), sorted by (i, j)
    std::vector<int> reverse_edge;          // index of (j, i) for each edge
    std::vector<int> node_edge_begin;       // incoming-edge ranges per node (edges are
    std::vector<int> node_edge_end;         //   grouped by receiver)
    std::vector<double> edge_inputs;        // [e][edge_input_len]
    std::vector<double> node_features;      // [i][node_len]
    std::vector<double> target_acc;         // [i][d]
    std::vector<double> masses;             // [i]

    int n_edges() const { return static_cast<int>(edges.size()); }
    std::span<const double> edge_input(int e) const
    {
        return { edge_inputs.data() + static_cast<std::size_t>(e) * layout.edge_input_len(),
                 static_cast<std::size_t>(layout.edge_input_len()) };
    }
};

// Builds the snapshot from raw per-frame arrays so that both the clean and
// the noise-corrupted pipelines share one code path.
GraphSnapshot build_snapshot(std::span<const double> positions, std::span<const double> velocities,
                             std::span<const double> target_acc, std::span<const double> masses,
                             std::span<const double> charges, int n, int d,
                             const FeatureLayout& layout, const Topology& topology);

} // namespace pairlearn::data
