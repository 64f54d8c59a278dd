#pragma once

// Scalar reverse-mode autodiff on a flat tape. Nodes are created in
// topological order (parents always precede children), forward values are
// stored on the node, and replay() recomputes them bit-for-bit. Two reverse
// passes exist: gradient() accumulates plain doubles, gradient_nodes() emits
// the adjoint computation back onto the tape so the result can be
// differentiated again (used for d²y/dθdx).
//
// A tape is a single-threaded object; independent tapes are independent.

#include <cstdint>
#include <span>
#include <vector>

namespace pairlearn::ad {

enum class Op : std::uint8_t {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Abs,
    Sign, // derivative 0 almost everywhere
    Relu,
    Step, // derivative 0 almost everywhere
    Sqrt,
    Exp,
    Log,
    Erf,
    Tanh,
};

struct Value {
    std::uint32_t id = 0;
};

class Tape {
public:
    Value input(double v) { return push(v, Op::Input, 0, 0); }
    Value constant(double v) { return push(v, Op::Const, 0, 0); }

    Value add(Value a, Value b) { return push(val(a) + val(b), Op::Add, a.id, b.id); }
    Value sub(Value a, Value b) { return push(val(a) - val(b), Op::Sub, a.id, b.id); }
    Value mul(Value a, Value b) { return push(val(a) * val(b), Op::Mul, a.id, b.id); }
    Value div(Value a, Value b);
    Value neg(Value a) { return push(-val(a), Op::Neg, a.id, 0); }
    Value abs(Value a);
    Value sign(Value a);
    Value relu(Value a);
    Value step(Value a);
    Value sqrt(Value a);
    Value exp(Value a);
    Value log(Value a);
    Value erf(Value a);
    Value tanh(Value a);

    // Convenience composites.
    Value add_const(Value a, double c) { return add(a, constant(c)); }
    Value mul_const(Value a, double c) { return mul(a, constant(c)); }
    Value square(Value a) { return mul(a, a); }
    Value sigmoid(Value a);

    double val(Value v) const { return nodes_[v.id].val; }
    std::size_t size() const { return nodes_.size(); }
    Op op(Value v) const { return nodes_[v.id].op; }

    void set_input(Value v, double x);

    // Recomputes every derived node from the leaves, in creation order.
    void replay();

    // d(output)/d(wrt_i) by reverse accumulation. Output must be scalar by
    // construction (it is a single node).
    std::vector<double> gradient(Value output, std::span<const Value> wrt) const;

    // Same, but the adjoints are built as tape nodes, so they can be fed to
    // gradient() again for mixed second derivatives.
    std::vector<Value> gradient_nodes(Value output, std::span<const Value> wrt);

private:
    struct Node {
        double val;
        Op op;
        std::uint32_t a, b;
    };

    Value push(double v, Op op, std::uint32_t a, std::uint32_t b);
    double recompute(const Node& n) const;

    std::vector<Node> nodes_;
};

} // namespace pairlearn::ad
