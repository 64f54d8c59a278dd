#include "pairlearn/loss.hpp"

#include "pairlearn/errors.hpp"

#include <cmath>

namespace pairlearn::train {

double loss_acceleration(std::span<const double> pred, std::span<const double> target, int T,
                         int n_nodes, int d)
{
    const std::size_t expect = static_cast<std::size_t>(T) * n_nodes * d;
    if (pred.size() != expect || target.size() != expect)
        throw ConfigError("loss_acceleration: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < expect; ++i)
        acc += std::fabs(pred[i] - target[i]);
    return acc / (static_cast<double>(T) * n_nodes);
}

double loss_symmetry_regularized(std::span<const double> pred, std::span<const double> target,
                                 int n_nodes, int d, std::span<const double> messages,
                                 std::span<const int> reverse_edge, int msg_dim, double alpha)
{
    if (alpha < 0.0)
        throw ConfigError("loss_symmetry_regularized: alpha must be non-negative");
    const double acc = loss_acceleration(pred, target, 1, n_nodes, d);
    if (alpha == 0.0)
        return acc;
    const int n_edges = static_cast<int>(reverse_edge.size());
    if (messages.size() != static_cast<std::size_t>(n_edges) * msg_dim)
        throw ConfigError("loss_symmetry_regularized: message shape mismatch");
    double sym = 0.0;
    for (int e = 0; e < n_edges; ++e) {
        const int r = reverse_edge[e];
        for (int k = 0; k < msg_dim; ++k)
            sym += std::fabs(messages[static_cast<std::size_t>(e) * msg_dim + k] +
                             messages[static_cast<std::size_t>(r) * msg_dim + k]);
    }
    return acc + alpha * sym / n_edges;
}

} // namespace pairlearn::train
