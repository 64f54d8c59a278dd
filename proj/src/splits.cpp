#include "pairlearn/splits.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pairlearn::data {

SplitSpec split_timesteps(int T, std::array<double, 3> ratios, std::uint64_t seed)
{
    if (T < 10)
        throw ConfigError("split_timesteps: need at least 10 time steps");
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("split_timesteps: ratios must sum to 1");

    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int i = T - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }

    const int n_train = static_cast<int>(std::floor(ratios[0] * T + 0.5));
    const int n_valid = static_cast<int>(std::floor(ratios[1] * T + 0.5));
    const int n_test = T - n_train - n_valid;
    if (n_train <= 0 || n_valid <= 0 || n_test <= 0)
        throw ConfigError("split_timesteps: a split would be empty");

    SplitSpec spec;
    spec.ratios = ratios;
    spec.seed = seed;
    spec.train.assign(order.begin(), order.begin() + n_train);
    spec.valid.assign(order.begin() + n_train, order.begin() + n_train + n_valid);
    spec.test.assign(order.begin() + n_train + n_valid, order.end());
    std::sort(spec.train.begin(), spec.train.end());
    std::sort(spec.valid.begin(), spec.valid.end());
    std::sort(spec.test.begin(), spec.test.end());
    return spec;
}

} // namespace pairlearn::data
