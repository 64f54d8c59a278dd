#include "pairlearn/activations.hpp"

#include "pairlearn/errors.hpp"

#include <cmath>

namespace pairlearn::ad {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;
constexpr double inv_sqrt_2pi = 0.39894228040143267794;

inline double sigmoid(double x)
{
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x)
{
    // log(1 + e^x) without overflow for large |x|.
    if (x > 0.0)
        return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

} // namespace

bool has_continuous_derivative(Activation kind)
{
    return kind != Activation::ReLU && kind != Activation::LeakyReLU;
}

ActEval activation_eval(Activation kind, double x)
{
    switch (kind) {
    case Activation::SiLU: {
        const double s = sigmoid(x);
        return { x * s, s * (1.0 + x * (1.0 - s)) };
    }
    case Activation::ReLU:
        return x > 0.0 ? ActEval{ x, 1.0 } : ActEval{ 0.0, 0.0 };
    case Activation::GELU: {
        const double phi = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
        const double dens = inv_sqrt_2pi * std::exp(-0.5 * x * x);
        return { x * phi, phi + x * dens };
    }
    case Activation::Tanh: {
        const double t = std::tanh(x);
        return { t, 1.0 - t * t };
    }
    case Activation::Sigmoid: {
        const double s = sigmoid(x);
        return { s, s * (1.0 - s) };
    }
    case Activation::Softplus:
        return { softplus(x), sigmoid(x) };
    case Activation::LeakyReLU:
        return x > 0.0 ? ActEval{ x, 1.0 } : ActEval{ leaky_relu_slope * x, leaky_relu_slope };
    }
    throw InvariantViolation("unknown activation kind");
}

double activation_second_deriv(Activation kind, double x)
{
    switch (kind) {
    case Activation::SiLU: {
        const double s = sigmoid(x);
        return s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
    }
    case Activation::ReLU:
    case Activation::LeakyReLU:
        return 0.0;
    case Activation::GELU: {
        const double dens = inv_sqrt_2pi * std::exp(-0.5 * x * x);
        return dens * (2.0 - x * x);
    }
    case Activation::Tanh: {
        const double t = std::tanh(x);
        return -2.0 * t * (1.0 - t * t);
    }
    case Activation::Sigmoid: {
        const double s = sigmoid(x);
        return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Activation::Softplus: {
        const double s = sigmoid(x);
        return s * (1.0 - s);
    }
    }
    throw InvariantViolation("unknown activation kind");
}

void activation_apply(Activation kind, const double* x, double* value, double* deriv, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        const ActEval e = activation_eval(kind, x[i]);
        value[i] = e.value;
        deriv[i] = e.deriv;
    }
}

void activation_second_apply(Activation kind, const double* x, double* second, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        second[i] = activation_second_deriv(kind, x[i]);
}

std::string_view activation_name(Activation kind)
{
    switch (kind) {
    case Activation::SiLU: return "silu";
    case Activation::ReLU: return "relu";
    case Activation::GELU: return "gelu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softplus: return "softplus";
    case Activation::LeakyReLU: return "leaky_relu";
    }
    return "?";
}

Activation activation_from_name(const std::string& name)
{
    if (name == "silu") return Activation::SiLU;
    if (name == "relu") return Activation::ReLU;
    if (name == "gelu") return Activation::GELU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softplus") return Activation::Softplus;
    if (name == "leaky_relu") return Activation::LeakyReLU;
    throw ConfigError("unknown activation '" + name + "'");
}

} // namespace pairlearn::ad
