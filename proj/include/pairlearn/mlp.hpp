#pragma once

// Fully connected nets with a single flat parameter vector. Layer weights
// are row-major (in x out) followed by the bias, layer after layer, which is
// also the checkpoint layout. Hidden layers apply the activation; the output
// layer is linear.
//
// Besides the plain forward/backward passes there are two pieces the
// potential-style models need:
//   input_gradient      g = d(out)/d(x) for scalar-output nets, and
//   mixed_second_accum  d/dtheta [ v . g ], the mixed second derivative
//                       contracted with a fixed vector v,
// computed by differentiating the backward pass in forward mode (tangent
// direction v on the input).

#include "pairlearn/activations.hpp"
#include "pairlearn/tape.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pairlearn::ad {

struct LayerView {
    int in = 0;
    int out = 0;
    std::size_t w_offset = 0; // into theta, in*out doubles, row-major [in][out]
    std::size_t b_offset = 0; // into theta, out doubles
};

class Mlp {
public:
    Mlp() = default;
    // dims = {in, hidden..., out}; consecutive dims chain by construction.
    Mlp(std::vector<int> dims, Activation act);

    // Uniform init in +-sqrt(6/(fan_in+fan_out)) per layer.
    static Mlp glorot(std::vector<int> dims, Activation act, std::uint64_t seed);

    int in_dim() const { return dims_.front(); }
    int out_dim() const { return dims_.back(); }
    int n_layers() const { return static_cast<int>(layers_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    Activation activation() const { return act_; }
    const LayerView& layer(int l) const { return layers_[l]; }

    std::span<double> theta() { return theta_; }
    std::span<const double> theta() const { return theta_; }
    std::size_t n_params() const { return theta_.size(); }

    const double* weights(int l) const { return theta_.data() + layers_[l].w_offset; }
    double* weights(int l) { return theta_.data() + layers_[l].w_offset; }
    const double* bias(int l) const { return theta_.data() + layers_[l].b_offset; }
    double* bias(int l) { return theta_.data() + layers_[l].b_offset; }

private:
    std::vector<int> dims_;
    Activation act_ = Activation::SiLU;
    std::vector<LayerView> layers_;
    std::vector<double> theta_;
};

// Per-thread scratch. Holds the forward stacks (pre-activations u, layer
// outputs z with z[0] = x) plus the reverse/tangent stacks. Reusable across
// calls; grows on demand.
struct MlpWork {
    std::vector<std::vector<double>> z, u, du; // du[l] = activation'(u[l])
    std::vector<std::vector<double>> s, p;     // reverse stacks
    std::vector<std::vector<double>> zt, ut;   // tangent forward
    std::vector<std::vector<double>> st, pt;   // tangent of reverse
    void resize(const Mlp& net);
};

// y = net(x); fills work.z/u/du for subsequent backward passes.
void mlp_forward(const Mlp& net, std::span<const double> x, MlpWork& work, std::span<double> y);

// Reverse pass from output cotangent dy. Accumulates parameter gradients
// into grad (same layout as theta) when grad is non-empty, and writes the
// input gradient into dx when non-empty. Requires a preceding mlp_forward
// on the same work. Fills work.s/p (reused by mlp_mixed_second_accum).
void mlp_backward(const Mlp& net, MlpWork& work, std::span<const double> dy,
                  std::span<double> grad, std::span<double> dx);

// g = d(out)/d(x) for a scalar-output net (out_dim == 1). Equivalent to
// mlp_backward with dy = {1} and no parameter accumulation.
void mlp_input_gradient(const Mlp& net, MlpWork& work, std::span<double> g);

// Accumulates d/dtheta [ sum_i v_i * g_i ] into grad, where g is the input
// gradient of the scalar output. Requires mlp_forward + a backward pass with
// dy = {1} on the same work (mlp_input_gradient does exactly that).
void mlp_mixed_second_accum(const Mlp& net, MlpWork& work, std::span<const double> v,
                            std::span<double> grad);

// Tape construction for the same net: creates input nodes for x and theta
// and builds the forward expression. Used by tests and the analytic-oracle
// paths; the structured passes above are the production route.
struct TapeMlp {
    std::vector<Value> x_nodes;
    std::vector<Value> theta_nodes; // layout identical to Mlp::theta()
    std::vector<Value> y_nodes;
};
TapeMlp tape_mlp_forward(Tape& tape, const Mlp& net, std::span<const double> x);

// Single activation value as a tape expression (matches activation_eval).
Value tape_activation(Tape& tape, Activation kind, Value x);

} // namespace pairlearn::ad
