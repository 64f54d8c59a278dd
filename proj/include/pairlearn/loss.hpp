#pragma once

// Training losses. l1 of two vectors is the sum (not mean) of per-component
// absolute differences; the acceleration loss averages that over time steps
// and nodes.

#include <span>
#include <vector>

namespace pairlearn::train {

// pred/target are [t][node][component] over T steps of n nodes:
// (1/T)(1/n) sum_t sum_i l1(pred_i^t, target_i^t).
double loss_acceleration(std::span<const double> pred, std::span<const double> target, int T,
                         int n_nodes, int d);

// Acceleration loss plus alpha * (1/|E|) sum over directed edges of
// l1(M_e + M_reverse(e)), for one snapshot.
double loss_symmetry_regularized(std::span<const double> pred, std::span<const double> target,
                                 int n_nodes, int d, std::span<const double> messages,
                                 std::span<const int> reverse_edge, int msg_dim, double alpha);

} // namespace pairlearn::train
