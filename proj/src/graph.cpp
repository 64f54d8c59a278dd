#include "pairlearn/graph.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/lj.hpp"

#include <algorithm>
#include <cmath>

namespace pairlearn::data {

std::string FeatureLayout::describe() const
{
    std::string s = "v" + std::to_string(version) + ":d=" + std::to_string(d) + ":node=[r,rdot";
    if (has_charge)
        s += ",q";
    s += ",m]:edge=[eta_i,eta_j";
    if (has_disp)
        s += ",disp";
    s += "]";
    return s;
}

Topology Topology::cutoff(double r_cut, double box)
{
    if (box <= 0.0)
        throw ConfigError("cutoff topology requires box metadata");
    if (r_cut <= 0.0 || !(r_cut < 0.5 * box))
        throw ConfigError("cutoff topology requires 0 < r_cut < box/2");
    Topology t;
    t.kind = Kind::Cutoff;
    t.r_cut = r_cut;
    t.box = box;
    return t;
}

GraphSnapshot build_snapshot(std::span<const double> positions, std::span<const double> velocities,
                             std::span<const double> target_acc, std::span<const double> masses,
                             std::span<const double> charges, int n, int d,
                             const FeatureLayout& layout, const Topology& topology)
{
    if (layout.d != d)
        throw ConfigError("build_snapshot: layout dimension mismatch");
    if (topology.kind == Topology::Kind::Cutoff && !layout.has_disp)
        throw ConfigError("build_snapshot: cutoff topology requires a displacement feature");

    GraphSnapshot snap;
    snap.n_nodes = n;
    snap.d = d;
    snap.layout = layout;
    snap.masses.assign(masses.begin(), masses.end());
    snap.target_acc.assign(target_acc.begin(), target_acc.end());

    const int node_len = layout.node_len();
    snap.node_features.resize(static_cast<std::size_t>(n) * node_len);
    for (int i = 0; i < n; ++i) {
        double* f = snap.node_features.data() + static_cast<std::size_t>(i) * node_len;
        int at = 0;
        for (int k = 0; k < d; ++k)
            f[at++] = positions[static_cast<std::size_t>(i) * d + k];
        for (int k = 0; k < d; ++k)
            f[at++] = velocities[static_cast<std::size_t>(i) * d + k];
        if (layout.has_charge)
            f[at++] = charges[i];
        f[at++] = masses[i];
    }

    // Directed edges grouped by receiver, sender ascending.
    std::vector<double> disps; // per edge, d components (cutoff only)
    if (topology.kind == Topology::Kind::Full) {
        snap.edges.reserve(static_cast<std::size_t>(n) * (n - 1));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i)
                    snap.edges.emplace_back(i, j);
    } else {
        double disp[3];
        const double rc2 = topology.r_cut * topology.r_cut;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                sim::minimum_image(positions.data() + static_cast<std::size_t>(i) * d,
                                   positions.data() + static_cast<std::size_t>(j) * d,
                                   topology.box, d, disp);
                double r2 = 0.0;
                for (int k = 0; k < d; ++k)
                    r2 += disp[k] * disp[k];
                if (r2 < rc2) {
                    snap.edges.emplace_back(i, j);
                    disps.insert(disps.end(), disp, disp + d);
                }
            }
    }

    const int n_edges = snap.n_edges();
    snap.node_edge_begin.assign(n, 0);
    snap.node_edge_end.assign(n, 0);
    for (int e = 0; e < n_edges; ++e) {
        const int recv = snap.edges[e].first;
        if (snap.node_edge_end[recv] == 0)
            snap.node_edge_begin[recv] = e;
        snap.node_edge_end[recv] = e + 1;
    }
    // Nodes without incoming edges get an empty range at 0; fix begins.
    for (int i = 0; i < n; ++i)
        if (snap.node_edge_end[i] == 0)
            snap.node_edge_begin[i] = 0;

    snap.reverse_edge.resize(n_edges);
    for (int e = 0; e < n_edges; ++e) {
        const auto rev = std::make_pair(snap.edges[e].second, snap.edges[e].first);
        const auto it = std::lower_bound(snap.edges.begin(), snap.edges.end(), rev);
        if (it == snap.edges.end() || *it != rev)
            throw InvariantViolation("edge set is not symmetric as a relation");
        snap.reverse_edge[e] = static_cast<int>(it - snap.edges.begin());
    }

    const int edge_len = layout.edge_input_len();
    snap.edge_inputs.resize(static_cast<std::size_t>(n_edges) * edge_len);
    for (int e = 0; e < n_edges; ++e) {
        const auto [i, j] = snap.edges[e];
        double* x = snap.edge_inputs.data() + static_cast<std::size_t>(e) * edge_len;
        const double* fi = snap.node_features.data() + static_cast<std::size_t>(i) * node_len;
        const double* fj = snap.node_features.data() + static_cast<std::size_t>(j) * node_len;
        std::copy(fi, fi + node_len, x);
        std::copy(fj, fj + node_len, x + node_len);
        if (layout.has_disp)
            std::copy(disps.data() + static_cast<std::size_t>(e) * d,
                      disps.data() + static_cast<std::size_t>(e) * d + d, x + layout.disp_offset());
    }
    return snap;
}

} // namespace pairlearn::data
