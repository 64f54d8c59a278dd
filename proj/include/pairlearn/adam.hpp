#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pairlearn::train {

struct AdamState {
    std::vector<double> m, v;
    long t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Standard Adam update with bias correction.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

} // namespace pairlearn::train
