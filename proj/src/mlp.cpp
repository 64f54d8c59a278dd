#include "pairlearn/mlp.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pairlearn::ad {

Mlp::Mlp(std::vector<int> dims, Activation act) : dims_(std::move(dims)), act_(act)
{
    if (dims_.size() < 2)
        throw ConfigError("mlp: need at least input and output dims");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const int in = dims_[l];
        const int out = dims_[l + 1];
        if (in <= 0 || out <= 0)
            throw ConfigError("mlp: layer dims must be positive");
        LayerView view;
        view.in = in;
        view.out = out;
        view.w_offset = offset;
        offset += static_cast<std::size_t>(in) * out;
        view.b_offset = offset;
        offset += out;
        layers_.push_back(view);
    }
    theta_.assign(offset, 0.0);
}

Mlp Mlp::glorot(std::vector<int> dims, Activation act, std::uint64_t seed)
{
    Mlp net(std::move(dims), act);
    Rng rng(seed);
    for (int l = 0; l < net.n_layers(); ++l) {
        const LayerView& view = net.layer(l);
        const double bound = std::sqrt(6.0 / (view.in + view.out));
        double* w = net.weights(l);
        for (int i = 0; i < view.in * view.out; ++i)
            w[i] = rng.uniform(-bound, bound);
        // biases start at zero
    }
    return net;
}

void MlpWork::resize(const Mlp& net)
{
    const auto& dims = net.dims();
    const int L = net.n_layers();
    const auto fit = [&](std::vector<std::vector<double>>& stack, bool by_output) {
        stack.resize(L + (by_output ? 0 : 1));
        for (int l = 0; l < static_cast<int>(stack.size()); ++l)
            stack[l].resize(by_output ? dims[l + 1] : dims[l]);
    };
    fit(z, false);  // z[l] has dims[l], l = 0..L
    fit(u, true);   // u[l] has dims[l+1]
    fit(du, true);
    fit(s, true);   // cotangent on u[l]
    fit(p, false);  // cotangent on z[l]
    fit(zt, false);
    fit(ut, true);
    fit(st, true);
    fit(pt, false);
}

void mlp_forward(const Mlp& net, std::span<const double> x, MlpWork& work, std::span<double> y)
{
    if (static_cast<int>(x.size()) != net.in_dim())
        throw ConfigError("mlp_forward: input length does not match in_dim");
    if (static_cast<int>(y.size()) != net.out_dim())
        throw ConfigError("mlp_forward: output span does not match out_dim");
    work.resize(net);
    const auto& k = kern::ops();
    const int L = net.n_layers();
    std::memcpy(work.z[0].data(), x.data(), x.size() * sizeof(double));
    for (int l = 0; l < L; ++l) {
        const LayerView& view = net.layer(l);
        double* out = work.u[l].data();
        std::memcpy(out, net.bias(l), view.out * sizeof(double));
        const double* w = net.weights(l);
        const double* in = work.z[l].data();
        for (int i = 0; i < view.in; ++i)
            k.axpy(in[i], w + static_cast<std::size_t>(i) * view.out, out, view.out);
        if (l + 1 < L) {
            activation_apply(net.activation(), out, work.z[l + 1].data(), work.du[l].data(),
                             view.out);
        } else {
            std::memcpy(work.z[l + 1].data(), out, view.out * sizeof(double));
        }
    }
    std::memcpy(y.data(), work.z[L].data(), y.size() * sizeof(double));
}

void mlp_backward(const Mlp& net, MlpWork& work, std::span<const double> dy,
                  std::span<double> grad, std::span<double> dx)
{
    if (static_cast<int>(dy.size()) != net.out_dim())
        throw ConfigError("mlp_backward: cotangent length does not match out_dim");
    if (!grad.empty() && grad.size() != net.n_params())
        throw ConfigError("mlp_backward: gradient buffer size mismatch");
    if (!dx.empty() && static_cast<int>(dx.size()) != net.in_dim())
        throw ConfigError("mlp_backward: dx buffer size mismatch");
    const auto& k = kern::ops();
    const int L = net.n_layers();
    std::memcpy(work.s[L - 1].data(), dy.data(), dy.size() * sizeof(double));
    for (int l = L - 1; l >= 0; --l) {
        const LayerView& view = net.layer(l);
        const double* s = work.s[l].data();
        if (!grad.empty()) {
            double* gw = grad.data() + view.w_offset;
            const double* z = work.z[l].data();
            for (int i = 0; i < view.in; ++i)
                k.axpy(z[i], s, gw + static_cast<std::size_t>(i) * view.out, view.out);
            k.axpy(1.0, s, grad.data() + view.b_offset, view.out);
        }
        const bool need_p = l > 0 || !dx.empty();
        if (need_p) {
            const double* w = net.weights(l);
            double* p = work.p[l].data();
            for (int i = 0; i < view.in; ++i)
                p[i] = k.dot(w + static_cast<std::size_t>(i) * view.out, s, view.out);
            if (l > 0)
                kern::ops().mul(work.du[l - 1].data(), p, work.s[l - 1].data(), view.in);
        }
    }
    if (!dx.empty())
        std::memcpy(dx.data(), work.p[0].data(), dx.size() * sizeof(double));
}

void mlp_input_gradient(const Mlp& net, MlpWork& work, std::span<double> g)
{
    if (net.out_dim() != 1)
        throw ConfigError("mlp_input_gradient: requires a scalar-output net");
    const double one = 1.0;
    mlp_backward(net, work, std::span<const double>(&one, 1), {}, g);
}

void mlp_mixed_second_accum(const Mlp& net, MlpWork& work, std::span<const double> v,
                            std::span<double> grad)
{
    if (net.out_dim() != 1)
        throw ConfigError("mlp_mixed_second_accum: requires a scalar-output net");
    if (static_cast<int>(v.size()) != net.in_dim())
        throw ConfigError("mlp_mixed_second_accum: tangent length mismatch");
    if (grad.size() != net.n_params())
        throw ConfigError("mlp_mixed_second_accum: gradient buffer size mismatch");
    const auto& k = kern::ops();
    const int L = net.n_layers();

    // Tangent forward along v.
    std::memcpy(work.zt[0].data(), v.data(), v.size() * sizeof(double));
    for (int l = 0; l < L; ++l) {
        const LayerView& view = net.layer(l);
        double* ut = work.ut[l].data();
        std::fill(ut, ut + view.out, 0.0);
        const double* w = net.weights(l);
        const double* zt = work.zt[l].data();
        for (int i = 0; i < view.in; ++i)
            k.axpy(zt[i], w + static_cast<std::size_t>(i) * view.out, ut, view.out);
        if (l + 1 < L)
            k.mul(work.du[l].data(), ut, work.zt[l + 1].data(), view.out);
    }

    // Tangent of the reverse pass; s/p stacks come from the primal backward.
    std::vector<double> d2(static_cast<std::size_t>(
        *std::max_element(net.dims().begin(), net.dims().end())));
    std::fill(work.st[L - 1].begin(), work.st[L - 1].end(), 0.0);
    for (int l = L - 1; l >= 0; --l) {
        const LayerView& view = net.layer(l);
        const double* s = work.s[l].data();
        const double* st = work.st[l].data();
        const double* z = work.z[l].data();
        const double* zt = work.zt[l].data();
        double* gw = grad.data() + view.w_offset;
        for (int i = 0; i < view.in; ++i) {
            double* row = gw + static_cast<std::size_t>(i) * view.out;
            if (zt[i] != 0.0)
                k.axpy(zt[i], s, row, view.out);
            if (z[i] != 0.0)
                k.axpy(z[i], st, row, view.out);
        }
        k.axpy(1.0, st, grad.data() + view.b_offset, view.out);
        if (l > 0) {
            const double* w = net.weights(l);
            double* pt = work.pt[l].data();
            for (int i = 0; i < view.in; ++i)
                pt[i] = k.dot(w + static_cast<std::size_t>(i) * view.out, st, view.out);
            // st[l-1] = act''(u[l-1]) * ut[l-1] * p[l]  +  act'(u[l-1]) * pt
            const int width = view.in;
            activation_second_apply(net.activation(), work.u[l - 1].data(), d2.data(), width);
            double* dst = work.st[l - 1].data();
            k.mul(d2.data(), work.ut[l - 1].data(), dst, width);
            k.mul(dst, work.p[l].data(), dst, width);
            k.mul_acc(work.du[l - 1].data(), pt, dst, width);
        }
    }
}

Value tape_activation(Tape& tape, Activation kind, Value x)
{
    switch (kind) {
    case Activation::SiLU:
        return tape.mul(x, tape.sigmoid(x));
    case Activation::ReLU:
        return tape.relu(x);
    case Activation::GELU:
        return tape.mul(tape.mul_const(x, 0.5),
                        tape.add_const(tape.erf(tape.mul_const(x, 0.70710678118654752440)), 1.0));
    case Activation::Tanh:
        return tape.tanh(x);
    case Activation::Sigmoid:
        return tape.sigmoid(x);
    case Activation::Softplus:
        return tape.log(tape.add_const(tape.exp(x), 1.0));
    case Activation::LeakyReLU:
        return tape.sub(tape.relu(x), tape.mul_const(tape.relu(tape.neg(x)), leaky_relu_slope));
    }
    throw InvariantViolation("unknown activation kind");
}

TapeMlp tape_mlp_forward(Tape& tape, const Mlp& net, std::span<const double> x)
{
    if (static_cast<int>(x.size()) != net.in_dim())
        throw ConfigError("tape_mlp_forward: input length does not match in_dim");
    TapeMlp out;
    out.x_nodes.reserve(x.size());
    for (double xi : x)
        out.x_nodes.push_back(tape.input(xi));
    out.theta_nodes.reserve(net.n_params());
    for (double t : net.theta())
        out.theta_nodes.push_back(tape.input(t));

    std::vector<Value> z = out.x_nodes;
    const int L = net.n_layers();
    for (int l = 0; l < L; ++l) {
        const LayerView& view = net.layer(l);
        std::vector<Value> next(view.out);
        for (int j = 0; j < view.out; ++j) {
            Value acc = out.theta_nodes[view.b_offset + j];
            for (int i = 0; i < view.in; ++i) {
                const Value wij = out.theta_nodes[view.w_offset + static_cast<std::size_t>(i) * view.out + j];
                acc = tape.add(acc, tape.mul(wij, z[i]));
            }
            next[j] = (l + 1 < L) ? tape_activation(tape, net.activation(), acc) : acc;
        }
        z = std::move(next);
    }
    out.y_nodes = std::move(z);
    return out;
}

} // namespace pairlearn::ad
