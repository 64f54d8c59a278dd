#pragma once

// Shared finite-difference oracles for the gradient tests. Central
// differences at epsilon = 1e-6; comparisons are relative with a small scale
// floor so roundoff on near-zero components is not mistaken for error.

#include "pairlearn/mlp.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

inline constexpr double fd_eps = 1e-6;

inline double rel_err(double a, double b, double floor = 1e-4)
{
    return std::fabs(a - b) / std::max({ floor, std::fabs(a), std::fabs(b) });
}

// d f / d x_i by central differences around x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double eps = fd_eps)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double fp = f(x);
        x[i] = keep - eps;
        const double fm = f(x);
        x[i] = keep;
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

// Scalar output of a (possibly multi-output) net contracted with `cot`.
inline double mlp_scalar(const pairlearn::ad::Mlp& net, const std::vector<double>& x,
                         const std::vector<double>& cot)
{
    pairlearn::ad::MlpWork work;
    std::vector<double> y(net.out_dim());
    pairlearn::ad::mlp_forward(net, x, work, y);
    double acc = 0.0;
    for (int k = 0; k < net.out_dim(); ++k)
        acc += cot[k] * y[k];
    return acc;
}

} // namespace testutil
