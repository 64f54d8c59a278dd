#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pairlearn::ad {

enum class Activation {
    SiLU,
    ReLU,
    GELU,
    Tanh,
    Sigmoid,
    Softplus,
    LeakyReLU,
};

inline constexpr double leaky_relu_slope = 0.01;

// True when the first derivative is continuous everywhere. ReLU and
// LeakyReLU are the only kinds with a kink.
bool has_continuous_derivative(Activation kind);

struct ActEval {
    double value;
    double deriv;
};

// Value and exact first derivative. GELU uses the erf form, not the tanh
// approximation, so finite-difference checks are clean.
ActEval activation_eval(Activation kind, double x);

// Second derivative; zero almost everywhere for ReLU/LeakyReLU.
double activation_second_deriv(Activation kind, double x);

// Array forms used by the MLP passes: value[i] = f(x[i]), deriv[i] = f'(x[i]).
void activation_apply(Activation kind, const double* x, double* value, double* deriv, std::size_t n);
void activation_second_apply(Activation kind, const double* x, double* second, std::size_t n);

std::string_view activation_name(Activation kind);
Activation activation_from_name(const std::string& name); // throws ConfigError

} // namespace pairlearn::ad
