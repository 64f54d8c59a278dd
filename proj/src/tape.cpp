#include "pairlearn/tape.hpp"

#include "pairlearn/errors.hpp"

#include <cmath>
#include <limits>

namespace pairlearn::ad {

namespace {
constexpr double two_over_sqrt_pi = 1.1283791670955125739;
constexpr std::uint32_t invalid_id = 0xffffffffu;
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
} // namespace

Value Tape::push(double v, Op op, std::uint32_t a, std::uint32_t b)
{
    nodes_.push_back(Node{ v, op, a, b });
    if (nodes_.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvariantViolation("tape overflow");
    return Value{ static_cast<std::uint32_t>(nodes_.size() - 1) };
}

Value Tape::div(Value a, Value b)
{
    return push(val(a) / val(b), Op::Div, a.id, b.id);
}

Value Tape::abs(Value a)
{
    return push(std::fabs(val(a)), Op::Abs, a.id, 0);
}

Value Tape::sign(Value a)
{
    return push(sgn(val(a)), Op::Sign, a.id, 0);
}

Value Tape::relu(Value a)
{
    return push(val(a) > 0.0 ? val(a) : 0.0, Op::Relu, a.id, 0);
}

Value Tape::step(Value a)
{
    return push(val(a) > 0.0 ? 1.0 : 0.0, Op::Step, a.id, 0);
}

Value Tape::sqrt(Value a)
{
    return push(std::sqrt(val(a)), Op::Sqrt, a.id, 0);
}

Value Tape::exp(Value a)
{
    return push(std::exp(val(a)), Op::Exp, a.id, 0);
}

Value Tape::log(Value a)
{
    return push(std::log(val(a)), Op::Log, a.id, 0);
}

Value Tape::erf(Value a)
{
    return push(std::erf(val(a)), Op::Erf, a.id, 0);
}

Value Tape::tanh(Value a)
{
    return push(std::tanh(val(a)), Op::Tanh, a.id, 0);
}

Value Tape::sigmoid(Value a)
{
    // 1 / (1 + exp(-x))
    return div(constant(1.0), add_const(exp(neg(a)), 1.0));
}

void Tape::set_input(Value v, double x)
{
    if (nodes_[v.id].op != Op::Input)
        throw InvariantViolation("set_input on a non-input node");
    nodes_[v.id].val = x;
}

double Tape::recompute(const Node& n) const
{
    const auto A = [&] { return nodes_[n.a].val; };
    const auto B = [&] { return nodes_[n.b].val; };
    switch (n.op) {
    case Op::Input:
    case Op::Const: return n.val;
    case Op::Add: return A() + B();
    case Op::Sub: return A() - B();
    case Op::Mul: return A() * B();
    case Op::Div: return A() / B();
    case Op::Neg: return -A();
    case Op::Abs: return std::fabs(A());
    case Op::Sign: return sgn(A());
    case Op::Relu: return A() > 0.0 ? A() : 0.0;
    case Op::Step: return A() > 0.0 ? 1.0 : 0.0;
    case Op::Sqrt: return std::sqrt(A());
    case Op::Exp: return std::exp(A());
    case Op::Log: return std::log(A());
    case Op::Erf: return std::erf(A());
    case Op::Tanh: return std::tanh(A());
    }
    throw InvariantViolation("unknown op");
}

void Tape::replay()
{
    for (auto& n : nodes_)
        n.val = recompute(n);
}

std::vector<double> Tape::gradient(Value output, std::span<const Value> wrt) const
{
    std::vector<double> adj(output.id + 1, 0.0);
    adj[output.id] = 1.0;
    for (std::uint32_t i = output.id + 1; i-- > 0;) {
        const double g = adj[i];
        if (g == 0.0)
            continue;
        const Node& n = nodes_[i];
        const double a = nodes_[n.a].val;
        const double y = n.val;
        switch (n.op) {
        case Op::Input:
        case Op::Const:
            break;
        case Op::Add:
            adj[n.a] += g;
            adj[n.b] += g;
            break;
        case Op::Sub:
            adj[n.a] += g;
            adj[n.b] -= g;
            break;
        case Op::Mul:
            adj[n.a] += g * nodes_[n.b].val;
            adj[n.b] += g * a;
            break;
        case Op::Div: {
            const double b = nodes_[n.b].val;
            adj[n.a] += g / b;
            adj[n.b] -= g * y / b;
            break;
        }
        case Op::Neg:
            adj[n.a] -= g;
            break;
        case Op::Abs:
            adj[n.a] += g * sgn(a);
            break;
        case Op::Sign:
        case Op::Step:
            break;
        case Op::Relu:
            adj[n.a] += a > 0.0 ? g : 0.0;
            break;
        case Op::Sqrt:
            adj[n.a] += g * 0.5 / y;
            break;
        case Op::Exp:
            adj[n.a] += g * y;
            break;
        case Op::Log:
            adj[n.a] += g / a;
            break;
        case Op::Erf:
            adj[n.a] += g * two_over_sqrt_pi * std::exp(-a * a);
            break;
        case Op::Tanh:
            adj[n.a] += g * (1.0 - y * y);
            break;
        }
    }
    std::vector<double> out;
    out.reserve(wrt.size());
    for (Value v : wrt)
        out.push_back(v.id <= output.id ? adj[v.id] : 0.0);
    return out;
}

std::vector<Value> Tape::gradient_nodes(Value output, std::span<const Value> wrt)
{
    // Adjoints as optional node handles; absent means structurally zero.
    const std::uint32_t top = output.id;
    std::vector<std::uint32_t> adj(top + 1, invalid_id);
    const Value one = constant(1.0);
    adj[top] = one.id;

    const auto accum = [&](std::uint32_t target, Value contribution) {
        if (adj[target] == invalid_id)
            adj[target] = contribution.id;
        else
            adj[target] = add(Value{ adj[target] }, contribution).id;
    };

    for (std::uint32_t i = top + 1; i-- > 0;) {
        if (adj[i] == invalid_id)
            continue;
        const Node n = nodes_[i]; // copy: nodes_ may reallocate below
        const Value g{ adj[i] };
        const Value va{ n.a };
        const Value vb{ n.b };
        const Value vy{ i };
        switch (n.op) {
        case Op::Input:
        case Op::Const:
            break;
        case Op::Add:
            accum(n.a, g);
            accum(n.b, g);
            break;
        case Op::Sub:
            accum(n.a, g);
            accum(n.b, neg(g));
            break;
        case Op::Mul:
            accum(n.a, mul(g, vb));
            accum(n.b, mul(g, va));
            break;
        case Op::Div:
            accum(n.a, div(g, vb));
            accum(n.b, neg(div(mul(g, vy), vb)));
            break;
        case Op::Neg:
            accum(n.a, neg(g));
            break;
        case Op::Abs:
            accum(n.a, mul(g, sign(va)));
            break;
        case Op::Sign:
        case Op::Step:
            break;
        case Op::Relu:
            accum(n.a, mul(g, step(va)));
            break;
        case Op::Sqrt:
            accum(n.a, div(mul_const(g, 0.5), vy));
            break;
        case Op::Exp:
            accum(n.a, mul(g, vy));
            break;
        case Op::Log:
            accum(n.a, div(g, va));
            break;
        case Op::Erf:
            accum(n.a, mul(g, mul_const(exp(neg(square(va))), two_over_sqrt_pi)));
            break;
        case Op::Tanh:
            accum(n.a, mul(g, sub(constant(1.0), square(vy))));
            break;
        }
    }

    std::vector<Value> out;
    out.reserve(wrt.size());
    for (Value v : wrt) {
        if (v.id <= top && adj[v.id] != invalid_id)
            out.push_back(Value{ adj[v.id] });
        else
            out.push_back(constant(0.0));
    }
    return out;
}

} // namespace pairlearn::ad
