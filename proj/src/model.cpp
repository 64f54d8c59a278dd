#include "pairlearn/model.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/rng.hpp"
#include "pairlearn/tape.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

namespace pairlearn::model {

using nlohmann::json;

namespace {

constexpr double ln10 = 2.302585092994045684;

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Typed view of one edge-input vector.
struct EdgeView {
    const double* r_i;
    const double* r_j;
    double q_i, q_j, m_i, m_j;
    const double* disp; // nullptr when the layout has no displacement block
};

EdgeView view_edge(const data::FeatureLayout& layout, std::span<const double> x)
{
    const int node_len = layout.node_len();
    const int d = layout.d;
    EdgeView v;
    v.r_i = x.data();
    v.r_j = x.data() + node_len;
    v.q_i = layout.has_charge ? x[2 * d] : 0.0;
    v.q_j = layout.has_charge ? x[node_len + 2 * d] : 0.0;
    v.m_i = x[node_len - 1];
    v.m_j = x[2 * node_len - 1];
    v.disp = layout.has_disp ? x.data() + layout.disp_offset() : nullptr;
    return v;
}

void edge_displacement(const EdgeView& v, int d, double* disp_out)
{
    if (v.disp) {
        for (int k = 0; k < d; ++k)
            disp_out[k] = v.disp[k];
    } else {
        for (int k = 0; k < d; ++k)
            disp_out[k] = v.r_j[k] - v.r_i[k];
    }
}

// Pairwise potential of the analytic law as a tape expression over the
// displacement nodes; the branch (Discontinuous / LJ cutoff) is resolved at
// primal values, matching how those laws are differentiable a.e.
ad::Value tape_law_potential(ad::Tape& tape, const sim::LawSpec& law,
                             std::span<const ad::Value> disp, double q_i, double q_j, double m_i,
                             double m_j)
{
    using sim::LawKind;
    ad::Value r2 = tape.square(disp[0]);
    for (std::size_t k = 1; k < disp.size(); ++k)
        r2 = tape.add(r2, tape.square(disp[k]));
    const ad::Value r = tape.sqrt(r2);
    switch (law.kind) {
    case LawKind::Spring:
        return tape.mul_const(tape.square(tape.add_const(r, -law.L)), 0.5 * law.k);
    case LawKind::Charge:
        return tape.div(tape.constant(law.c * q_i * q_j), tape.add_const(r, law.delta));
    case LawKind::Orbital:
        return tape.mul_const(tape.log(tape.add_const(r, law.delta)), m_i * m_j);
    case LawKind::Discontinuous:
        if (tape.val(r) < law.theta)
            return tape.constant(0.0);
        return tape.mul_const(tape.square(tape.add_const(r, -1.0)), 0.5);
    case LawKind::LennardJones: {
        if (tape.val(r) >= law.lj_cutoff)
            return tape.constant(0.0);
        const ad::Value sr = tape.div(tape.constant(law.lj_sigma), r);
        const ad::Value sr2 = tape.square(sr);
        const ad::Value sr6 = tape.mul(tape.square(sr2), sr2);
        const ad::Value sr12 = tape.square(sr6);
        return tape.mul_const(tape.sub(sr12, sr6), 4.0 * law.lj_epsilon);
    }
    }
    throw InvariantViolation("unknown law kind");
}

// Oracle potential message and its derivative with respect to the receiver
// position, obtained by differentiating the tape expression (the oracle goes
// through the same kind of machinery as a learned net, not through the
// analytic force formula).
double oracle_potential_grad(const sim::LawSpec& law, const EdgeView& v, int d, double* dmdr_out)
{
    ad::Tape tape;
    std::vector<ad::Value> wrt;
    ad::Value pot;
    if (v.disp) {
        std::vector<ad::Value> disp(d);
        for (int k = 0; k < d; ++k)
            disp[k] = tape.input(v.disp[k]);
        pot = tape_law_potential(tape, law, disp, v.q_i, v.q_j, v.m_i, v.m_j);
        wrt = disp;
        const auto g = tape.gradient(pot, wrt);
        for (int k = 0; k < d; ++k)
            dmdr_out[k] = -g[k]; // d disp / d r_i = -I
    } else {
        std::vector<ad::Value> ri(d);
        std::vector<ad::Value> disp(d);
        for (int k = 0; k < d; ++k)
            ri[k] = tape.input(v.r_i[k]);
        for (int k = 0; k < d; ++k)
            disp[k] = tape.sub(tape.input(v.r_j[k]), ri[k]);
        pot = tape_law_potential(tape, law, disp, v.q_i, v.q_j, v.m_i, v.m_j);
        wrt = ri;
        const auto g = tape.gradient(pot, wrt);
        for (int k = 0; k < d; ++k)
            dmdr_out[k] = g[k];
    }
    return tape.val(pot);
}

void oracle_message(const Model& m, std::span<const double> x, double* msg_out)
{
    const EdgeView v = view_edge(m.layout, x);
    double disp[3];
    edge_displacement(v, m.d, disp);
    if (m.kind == ModelKind::OracleForce)
        sim::law_force(m.oracle_law, disp, v.q_i, v.q_j, v.m_i, v.m_j, m.d, msg_out);
    else
        *msg_out = sim::law_potential(m.oracle_law, disp, v.q_i, v.q_j, v.m_i, v.m_j, m.d);
}

void check_layout(const Model& m, const data::GraphSnapshot& snap)
{
    if (!(snap.layout == m.layout))
        throw ConfigError("feature layout of snapshot does not match the model (" +
                          snap.layout.describe() + " vs " + m.layout.describe() + ")");
}

double scale_divisor(const Model& m, int node)
{
    const double w = m.kind == ModelKind::LearnedScaleShared ? m.node_scalars.at(0)
                                                             : m.node_scalars.at(node);
    return std::pow(10.0, w);
}

} // namespace

std::string_view model_kind_name(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Force: return "force";
    case ModelKind::Potential: return "potential";
    case ModelKind::Baseline: return "baseline";
    case ModelKind::LearnedScale: return "learned_scale";
    case ModelKind::LearnedScaleShared: return "learned_scale_shared";
    case ModelKind::OracleForce: return "oracle_force";
    case ModelKind::OraclePotential: return "oracle_potential";
    }
    return "?";
}

ModelKind model_kind_from_name(const std::string& name)
{
    if (name == "force") return ModelKind::Force;
    if (name == "potential") return ModelKind::Potential;
    if (name == "baseline") return ModelKind::Baseline;
    if (name == "learned_scale") return ModelKind::LearnedScale;
    if (name == "learned_scale_shared") return ModelKind::LearnedScaleShared;
    if (name == "oracle_force") return ModelKind::OracleForce;
    if (name == "oracle_potential") return ModelKind::OraclePotential;
    throw ConfigError("unknown model kind '" + name + "'");
}

int Model::message_dim() const
{
    switch (kind) {
    case ModelKind::Force:
    case ModelKind::LearnedScale:
    case ModelKind::LearnedScaleShared:
    case ModelKind::OracleForce:
        return d;
    case ModelKind::Potential:
    case ModelKind::OraclePotential:
        return 1;
    case ModelKind::Baseline:
        return edge_net.out_dim();
    }
    throw InvariantViolation("unknown model kind");
}

std::size_t Model::n_params() const
{
    if (is_oracle())
        return 0;
    std::size_t n = edge_net.n_params();
    if (kind == ModelKind::Baseline)
        n += node_net.n_params();
    if (kind == ModelKind::LearnedScale || kind == ModelKind::LearnedScaleShared)
        n += node_scalars.size();
    return n;
}

void Model::copy_params(std::span<double> out) const
{
    if (out.size() != n_params())
        throw InvariantViolation("copy_params: size mismatch");
    std::size_t at = 0;
    std::memcpy(out.data(), edge_net.theta().data(), edge_net.n_params() * sizeof(double));
    at += edge_net.n_params();
    if (kind == ModelKind::Baseline) {
        std::memcpy(out.data() + at, node_net.theta().data(),
                    node_net.n_params() * sizeof(double));
        at += node_net.n_params();
    }
    if (!node_scalars.empty())
        std::memcpy(out.data() + at, node_scalars.data(), node_scalars.size() * sizeof(double));
}

void Model::set_params(std::span<const double> in)
{
    if (in.size() != n_params())
        throw InvariantViolation("set_params: size mismatch");
    std::size_t at = 0;
    std::memcpy(edge_net.theta().data(), in.data(), edge_net.n_params() * sizeof(double));
    at += edge_net.n_params();
    if (kind == ModelKind::Baseline) {
        std::memcpy(node_net.theta().data(), in.data() + at,
                    node_net.n_params() * sizeof(double));
        at += node_net.n_params();
    }
    if (!node_scalars.empty())
        std::memcpy(node_scalars.data(), in.data() + at, node_scalars.size() * sizeof(double));
}

Model make_model(const ModelConfig& config, const data::FeatureLayout& layout)
{
    Model m;
    m.kind = config.kind;
    m.d = layout.d;
    m.layout = layout;
    if (m.is_oracle())
        throw ConfigError("make_model: use make_oracle for oracle kinds");

    int edge_out = layout.d;
    if (config.kind == ModelKind::Potential)
        edge_out = 1;
    else if (config.kind == ModelKind::Baseline && config.scalar_messages)
        edge_out = 1;

    if (config.kind == ModelKind::Potential) {
        if (config.activation == ad::Activation::ReLU)
            throw ConfigError("potential model: ReLU has a piecewise-constant derivative and "
                              "cannot represent a continuous force field; pick a smooth "
                              "activation");
        if (config.activation == ad::Activation::LeakyReLU)
            std::cerr << "warning: potential model with leaky_relu produces a discontinuous "
                         "force field\n";
    }

    std::vector<int> edge_dims;
    edge_dims.push_back(layout.edge_input_len());
    edge_dims.insert(edge_dims.end(), config.hidden.begin(), config.hidden.end());
    edge_dims.push_back(edge_out);
    m.edge_net = ad::Mlp::glorot(edge_dims, config.activation, derive_seed(config.init_seed, 101));

    if (config.kind == ModelKind::Baseline) {
        std::vector<int> node_dims;
        node_dims.push_back(layout.node_len() + edge_out);
        node_dims.insert(node_dims.end(), config.hidden.begin(), config.hidden.end());
        node_dims.push_back(layout.d);
        m.node_net =
            ad::Mlp::glorot(node_dims, config.activation, derive_seed(config.init_seed, 102));
    }
    if (config.kind == ModelKind::LearnedScale) {
        if (config.n_nodes <= 0)
            throw ConfigError("learned_scale model requires the node count of the training "
                              "system");
        m.node_scalars.assign(config.n_nodes, 0.0); // divisor 10^0 = 1
    }
    if (config.kind == ModelKind::LearnedScaleShared)
        m.node_scalars.assign(1, 0.0);
    return m;
}

Model make_oracle(ModelKind kind, const sim::LawSpec& law, const data::FeatureLayout& layout)
{
    if (kind != ModelKind::OracleForce && kind != ModelKind::OraclePotential)
        throw ConfigError("make_oracle: not an oracle kind");
    Model m;
    m.kind = kind;
    m.d = layout.d;
    m.layout = layout;
    m.oracle_law = law;
    return m;
}

void edge_messages(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                   std::vector<double>& messages)
{
    check_layout(m, snap);
    const int msg_dim = m.message_dim();
    messages.resize(static_cast<std::size_t>(snap.n_edges()) * msg_dim);
    for (int e = 0; e < snap.n_edges(); ++e) {
        double* out = messages.data() + static_cast<std::size_t>(e) * msg_dim;
        if (m.is_oracle())
            oracle_message(m, snap.edge_input(e), out);
        else
            ad::mlp_forward(m.edge_net, snap.edge_input(e), work.edge_work,
                            { out, static_cast<std::size_t>(msg_dim) });
    }
}

void node_operator_force(std::span<const double> messages, const data::GraphSnapshot& snap,
                         std::span<double> acc_out)
{
    const int d = snap.d;
    std::fill(acc_out.begin(), acc_out.end(), 0.0);
    for (int e = 0; e < snap.n_edges(); ++e) {
        const int recv = snap.edges[e].first;
        for (int k = 0; k < d; ++k)
            acc_out[static_cast<std::size_t>(recv) * d + k] +=
                messages[static_cast<std::size_t>(e) * d + k];
    }
    for (int i = 0; i < snap.n_nodes; ++i) {
        if (!(snap.masses[i] > 0.0))
            throw InvariantViolation("node_operator_force: non-positive mass");
        for (int k = 0; k < d; ++k)
            acc_out[static_cast<std::size_t>(i) * d + k] /= snap.masses[i];
    }
}

namespace {

// Shared potential-operator pass: per edge the scalar message M and
// h = dM/dr_i (receiver-position block, minus the displacement block when
// present). Accelerations are -(sum of h)/m; the claimed pairwise force is
// -h.
void potential_pass(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                    std::vector<double>* messages, std::vector<double>* pair_forces,
                    std::span<double> acc_out)
{
    const int d = snap.d;
    if (!m.is_oracle()) {
        if (m.edge_net.out_dim() != 1)
            throw ConfigError("potential operator requires a scalar edge network");
        if (m.edge_net.activation() == ad::Activation::ReLU)
            throw ConfigError("potential operator rejects ReLU edge networks");
    }
    if (!acc_out.empty())
        std::fill(acc_out.begin(), acc_out.end(), 0.0);
    if (messages)
        messages->resize(snap.n_edges());
    if (pair_forces)
        pair_forces->resize(static_cast<std::size_t>(snap.n_edges()) * d);

    const int in_dim = snap.layout.edge_input_len();
    std::vector<double>& g = work.buf;
    g.resize(in_dim);
    double h[3];
    for (int e = 0; e < snap.n_edges(); ++e) {
        const auto x = snap.edge_input(e);
        double msg;
        if (m.is_oracle()) {
            const EdgeView v = view_edge(m.layout, x);
            msg = oracle_potential_grad(m.oracle_law, v, d, h);
        } else {
            double y;
            ad::mlp_forward(m.edge_net, x, work.edge_work, { &y, 1 });
            msg = y;
            ad::mlp_input_gradient(m.edge_net, work.edge_work, g);
            const int recv = snap.layout.recv_pos_offset();
            const int disp = snap.layout.disp_offset();
            for (int k = 0; k < d; ++k) {
                h[k] = g[recv + k];
                if (disp >= 0)
                    h[k] -= g[disp + k];
            }
        }
        if (messages)
            (*messages)[e] = msg;
        if (pair_forces)
            for (int k = 0; k < d; ++k)
                (*pair_forces)[static_cast<std::size_t>(e) * d + k] = -h[k];
        if (!acc_out.empty()) {
            const int recv_node = snap.edges[e].first;
            for (int k = 0; k < d; ++k)
                acc_out[static_cast<std::size_t>(recv_node) * d + k] -= h[k];
        }
    }
    if (!acc_out.empty())
        for (int i = 0; i < snap.n_nodes; ++i) {
            if (!(snap.masses[i] > 0.0))
                throw InvariantViolation("node_operator_potential: non-positive mass");
            for (int k = 0; k < d; ++k)
                acc_out[static_cast<std::size_t>(i) * d + k] /= snap.masses[i];
        }
}

void baseline_acc(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                  std::span<const double> messages, std::span<double> acc_out)
{
    const int d = snap.d;
    const int msg_dim = m.message_dim();
    const int node_len = snap.layout.node_len();
    std::vector<double>& input = work.buf;
    input.resize(node_len + msg_dim);
    for (int i = 0; i < snap.n_nodes; ++i) {
        std::memcpy(input.data(), snap.node_features.data() + static_cast<std::size_t>(i) * node_len,
                    node_len * sizeof(double));
        std::fill(input.begin() + node_len, input.end(), 0.0);
        for (int e = snap.node_edge_begin[i]; e < snap.node_edge_end[i]; ++e)
            for (int k = 0; k < msg_dim; ++k)
                input[node_len + k] += messages[static_cast<std::size_t>(e) * msg_dim + k];
        ad::mlp_forward(m.node_net, input, work.node_work,
                        { acc_out.data() + static_cast<std::size_t>(i) * d,
                          static_cast<std::size_t>(d) });
    }
}

void scaled_acc(const Model& m, const data::GraphSnapshot& snap,
                std::span<const double> messages, std::span<double> acc_out)
{
    const int d = snap.d;
    if (m.kind == ModelKind::LearnedScale &&
        static_cast<int>(m.node_scalars.size()) != snap.n_nodes)
        throw ConfigError("learned_scale: node scalars were trained for a different system "
                          "size; acceleration prediction is refused");
    std::fill(acc_out.begin(), acc_out.end(), 0.0);
    for (int e = 0; e < snap.n_edges(); ++e) {
        const int recv = snap.edges[e].first;
        for (int k = 0; k < d; ++k)
            acc_out[static_cast<std::size_t>(recv) * d + k] +=
                messages[static_cast<std::size_t>(e) * d + k];
    }
    for (int i = 0; i < snap.n_nodes; ++i) {
        const double divisor = scale_divisor(m, i);
        for (int k = 0; k < d; ++k)
            acc_out[static_cast<std::size_t>(i) * d + k] /= divisor;
    }
}

} // namespace

void node_operator_potential(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                             std::span<double> acc_out, std::vector<double>* pair_forces)
{
    check_layout(m, snap);
    potential_pass(m, snap, work, nullptr, pair_forces, acc_out);
}

void oracle_pairwise(const Model& m, std::span<const double> edge_input, double* force_out,
                     double* potential_out)
{
    if (!m.is_oracle())
        throw ConfigError("oracle_pairwise: not an oracle model");
    const EdgeView v = view_edge(m.layout, edge_input);
    if (m.kind == ModelKind::OracleForce) {
        double disp[3];
        edge_displacement(v, m.d, disp);
        sim::law_force(m.oracle_law, disp, v.q_i, v.q_j, v.m_i, v.m_j, m.d, force_out);
        if (potential_out)
            *potential_out = sim::law_potential(m.oracle_law, disp, v.q_i, v.q_j, v.m_i, v.m_j, m.d);
        return;
    }
    double h[3];
    const double pot = oracle_potential_grad(m.oracle_law, v, m.d, h);
    for (int k = 0; k < m.d; ++k)
        force_out[k] = -h[k];
    if (potential_out)
        *potential_out = pot;
}

Prediction predict(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                   bool skip_acceleration)
{
    check_layout(m, snap);
    const int d = snap.d;
    Prediction pred;
    const std::size_t acc_size = static_cast<std::size_t>(snap.n_nodes) * d;

    if (m.kind == ModelKind::Potential || m.kind == ModelKind::OraclePotential) {
        if (!skip_acceleration)
            pred.accelerations.resize(acc_size);
        potential_pass(m, snap, work, &pred.messages, &pred.forces,
                       skip_acceleration ? std::span<double>{}
                                         : std::span<double>(pred.accelerations));
        pred.potentials = pred.messages;
        return pred;
    }

    edge_messages(m, snap, work, pred.messages);
    const int msg_dim = m.message_dim();
    if (msg_dim == d) {
        pred.forces = pred.messages;
    } else {
        // Scalar-message baseline: messages are claimed potentials; the
        // claimed force is the negative receiver-position gradient.
        pred.potentials = pred.messages;
        std::vector<double> dummy_msgs;
        potential_pass(m, snap, work, &dummy_msgs, &pred.forces, {});
    }
    if (skip_acceleration)
        return pred;

    pred.accelerations.resize(acc_size);
    switch (m.kind) {
    case ModelKind::Force:
    case ModelKind::OracleForce:
        node_operator_force(pred.messages, snap, pred.accelerations);
        break;
    case ModelKind::Baseline:
        baseline_acc(m, snap, work, pred.messages, pred.accelerations);
        break;
    case ModelKind::LearnedScale:
    case ModelKind::LearnedScaleShared:
        scaled_acc(m, snap, pred.messages, pred.accelerations);
        break;
    default:
        throw InvariantViolation("predict: unexpected kind");
    }
    return pred;
}

double snapshot_loss(const Model& m, const data::GraphSnapshot& snap, ModelWork& work)
{
    const Prediction pred = predict(m, snap, work);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.accelerations.size(); ++i)
        loss += std::fabs(pred.accelerations[i] - snap.target_acc[i]);
    return loss / snap.n_nodes;
}

SnapshotLoss model_backward(const Model& m, const data::GraphSnapshot& snap, ModelWork& work,
                            std::span<double> grad, double weight, double alpha)
{
    check_layout(m, snap);
    if (m.is_oracle())
        throw ConfigError("oracle models have no trainable parameters");
    if (grad.size() != m.n_params())
        throw InvariantViolation("model_backward: gradient buffer size mismatch");
    if (alpha < 0.0)
        throw ConfigError("model_backward: alpha must be non-negative");
    if (alpha > 0.0 && m.message_dim() != snap.d)
        throw ConfigError("symmetry regularization requires force-interpretable (d-dim) "
                          "messages");

    const int d = snap.d;
    const int n = snap.n_nodes;
    const int n_edges = snap.n_edges();
    const int msg_dim = m.message_dim();
    const std::size_t edge_params = m.edge_net.n_params();
    std::span<double> edge_grad = grad.subspan(0, edge_params);

    SnapshotLoss out;
    std::vector<double> acc(static_cast<std::size_t>(n) * d);
    std::vector<double> residual_sign(acc.size());

    if (m.kind == ModelKind::Potential) {
        // Pass A: messages and receiver-position gradients.
        std::vector<double> h(static_cast<std::size_t>(n_edges) * d);
        {
            std::vector<double> forces;
            potential_pass(m, snap, work, nullptr, &forces, acc);
            for (std::size_t i = 0; i < h.size(); ++i)
                h[i] = -forces[i];
        }
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const double r = acc[i] - snap.target_acc[i];
            out.acceleration += std::fabs(r);
            residual_sign[i] = sgn(r);
        }
        out.acceleration /= n;

        // Pass B: mixed second derivative, tangent = dL/dh mapped into the
        // input blocks that feed dM/dr_i.
        const int in_dim = snap.layout.edge_input_len();
        const int recv = snap.layout.recv_pos_offset();
        const int disp = snap.layout.disp_offset();
        std::vector<double> v(in_dim);
        std::vector<double> g(in_dim);
        for (int e = 0; e < n_edges; ++e) {
            const int recv_node = snap.edges[e].first;
            std::fill(v.begin(), v.end(), 0.0);
            bool any = false;
            for (int k = 0; k < d; ++k) {
                const double w_k = -weight / n * residual_sign[static_cast<std::size_t>(recv_node) * d + k] /
                                   snap.masses[recv_node];
                if (w_k != 0.0)
                    any = true;
                v[recv + k] = w_k;
                if (disp >= 0)
                    v[disp + k] = -w_k;
            }
            if (!any)
                continue;
            double y;
            ad::mlp_forward(m.edge_net, snap.edge_input(e), work.edge_work, { &y, 1 });
            ad::mlp_input_gradient(m.edge_net, work.edge_work, g);
            ad::mlp_mixed_second_accum(m.edge_net, work.edge_work, v, edge_grad);
        }
        return out;
    }

    // Message-producing kinds: forward messages, then per-edge cotangents.
    std::vector<double> messages;
    edge_messages(m, snap, work, messages);

    std::size_t at = edge_params;
    std::span<double> node_grad;
    std::span<double> scalar_grad;
    if (m.kind == ModelKind::Baseline) {
        node_grad = grad.subspan(at, m.node_net.n_params());
        at += m.node_net.n_params();
    }
    if (m.kind == ModelKind::LearnedScale || m.kind == ModelKind::LearnedScaleShared)
        scalar_grad = grad.subspan(at, m.node_scalars.size());

    switch (m.kind) {
    case ModelKind::Force:
        node_operator_force(messages, snap, acc);
        break;
    case ModelKind::Baseline:
        baseline_acc(m, snap, work, messages, acc);
        break;
    case ModelKind::LearnedScale:
    case ModelKind::LearnedScaleShared:
        scaled_acc(m, snap, messages, acc);
        break;
    default:
        throw InvariantViolation("model_backward: unexpected kind");
    }

    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double r = acc[i] - snap.target_acc[i];
        out.acceleration += std::fabs(r);
        residual_sign[i] = sgn(r);
    }
    out.acceleration /= n;

    // Cotangent on each edge message.
    std::vector<double> msg_cot(messages.size(), 0.0);
    const double acc_w = weight / n;

    switch (m.kind) {
    case ModelKind::Force:
        for (int e = 0; e < n_edges; ++e) {
            const int i = snap.edges[e].first;
            for (int k = 0; k < d; ++k)
                msg_cot[static_cast<std::size_t>(e) * d + k] =
                    acc_w * residual_sign[static_cast<std::size_t>(i) * d + k] / snap.masses[i];
        }
        break;
    case ModelKind::LearnedScale:
    case ModelKind::LearnedScaleShared:
        for (int e = 0; e < n_edges; ++e) {
            const int i = snap.edges[e].first;
            const double divisor = scale_divisor(m, i);
            for (int k = 0; k < d; ++k)
                msg_cot[static_cast<std::size_t>(e) * d + k] =
                    acc_w * residual_sign[static_cast<std::size_t>(i) * d + k] / divisor;
        }
        for (int i = 0; i < n; ++i) {
            double gw = 0.0;
            for (int k = 0; k < d; ++k)
                gw += residual_sign[static_cast<std::size_t>(i) * d + k] *
                      (-ln10 * acc[static_cast<std::size_t>(i) * d + k]);
            scalar_grad[m.kind == ModelKind::LearnedScaleShared ? 0 : i] += acc_w * gw;
        }
        break;
    case ModelKind::Baseline: {
        const int node_len = snap.layout.node_len();
        std::vector<double> input(node_len + msg_dim);
        std::vector<double> dy(d);
        std::vector<double> dx(node_len + msg_dim);
        for (int i = 0; i < n; ++i) {
            std::memcpy(input.data(),
                        snap.node_features.data() + static_cast<std::size_t>(i) * node_len,
                        node_len * sizeof(double));
            std::fill(input.begin() + node_len, input.end(), 0.0);
            for (int e = snap.node_edge_begin[i]; e < snap.node_edge_end[i]; ++e)
                for (int k = 0; k < msg_dim; ++k)
                    input[node_len + k] += messages[static_cast<std::size_t>(e) * msg_dim + k];
            double y[3];
            ad::mlp_forward(m.node_net, input, work.node_work, { y, static_cast<std::size_t>(d) });
            for (int k = 0; k < d; ++k)
                dy[k] = acc_w * residual_sign[static_cast<std::size_t>(i) * d + k];
            ad::mlp_backward(m.node_net, work.node_work, dy, node_grad, dx);
            for (int e = snap.node_edge_begin[i]; e < snap.node_edge_end[i]; ++e)
                for (int k = 0; k < msg_dim; ++k)
                    msg_cot[static_cast<std::size_t>(e) * msg_dim + k] += dx[node_len + k];
        }
        break;
    }
    default:
        throw InvariantViolation("model_backward: unexpected kind");
    }

    if (alpha > 0.0) {
        for (int e = 0; e < n_edges; ++e) {
            const int r = snap.reverse_edge[e];
            double l1 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double s = messages[static_cast<std::size_t>(e) * d + k] +
                                 messages[static_cast<std::size_t>(r) * d + k];
                l1 += std::fabs(s);
                // each unordered pair appears in two terms of the sum
                msg_cot[static_cast<std::size_t>(e) * d + k] +=
                    2.0 * alpha * weight / n_edges * sgn(s);
            }
            out.symmetry += l1;
        }
        out.symmetry /= n_edges;
    }

    // Backpropagate message cotangents through the edge net.
    std::vector<double> cot(msg_dim);
    for (int e = 0; e < n_edges; ++e) {
        bool any = false;
        for (int k = 0; k < msg_dim; ++k) {
            cot[k] = msg_cot[static_cast<std::size_t>(e) * msg_dim + k];
            if (cot[k] != 0.0)
                any = true;
        }
        if (!any)
            continue;
        double y[3];
        ad::mlp_forward(m.edge_net, snap.edge_input(e), work.edge_work,
                        { y, static_cast<std::size_t>(msg_dim) });
        ad::mlp_backward(m.edge_net, work.edge_work, cot, edge_grad, {});
    }
    return out;
}

void save_checkpoint(const Model& m, const std::string& path, std::uint64_t rng_seed_record)
{
    json j;
    j["format"] = "pairlearn-checkpoint";
    j["version"] = 1;
    j["kind"] = std::string(model_kind_name(m.kind));
    j["d"] = m.d;
    j["layout"] = { { "version", m.layout.version },
                    { "d", m.layout.d },
                    { "has_charge", m.layout.has_charge },
                    { "has_disp", m.layout.has_disp } };
    j["rng_seed"] = rng_seed_record;
    if (m.is_oracle()) {
        j["oracle_law"] = { { "kind", std::string(sim::law_name(m.oracle_law.kind)) },
                            { "k", m.oracle_law.k },
                            { "L", m.oracle_law.L },
                            { "c", m.oracle_law.c },
                            { "delta", m.oracle_law.delta },
                            { "theta", m.oracle_law.theta },
                            { "lj_epsilon", m.oracle_law.lj_epsilon },
                            { "lj_sigma", m.oracle_law.lj_sigma },
                            { "lj_cutoff", m.oracle_law.lj_cutoff } };
    } else {
        j["activation"] = std::string(ad::activation_name(m.edge_net.activation()));
        j["edge_dims"] = m.edge_net.dims();
        j["edge_theta"] = std::vector<double>(m.edge_net.theta().begin(), m.edge_net.theta().end());
        if (m.kind == ModelKind::Baseline) {
            j["node_dims"] = m.node_net.dims();
            j["node_theta"] =
                std::vector<double>(m.node_net.theta().begin(), m.node_net.theta().end());
        }
        if (!m.node_scalars.empty())
            j["node_scalars"] = m.node_scalars;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open checkpoint '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

Model load_checkpoint(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open checkpoint '" + path + "'");
    json j;
    in >> j;
    if (j.value("format", "") != "pairlearn-checkpoint")
        throw DataError("'" + path + "' is not a checkpoint");
    Model m;
    m.kind = model_kind_from_name(j.at("kind").get<std::string>());
    m.d = j.at("d").get<int>();
    const auto& jl = j.at("layout");
    m.layout.version = jl.at("version").get<int>();
    m.layout.d = jl.at("d").get<int>();
    m.layout.has_charge = jl.at("has_charge").get<bool>();
    m.layout.has_disp = jl.at("has_disp").get<bool>();
    if (m.is_oracle()) {
        const auto& jo = j.at("oracle_law");
        m.oracle_law.kind = sim::law_from_name(jo.at("kind").get<std::string>());
        m.oracle_law.k = jo.at("k").get<double>();
        m.oracle_law.L = jo.at("L").get<double>();
        m.oracle_law.c = jo.at("c").get<double>();
        m.oracle_law.delta = jo.at("delta").get<double>();
        m.oracle_law.theta = jo.at("theta").get<double>();
        m.oracle_law.lj_epsilon = jo.at("lj_epsilon").get<double>();
        m.oracle_law.lj_sigma = jo.at("lj_sigma").get<double>();
        m.oracle_law.lj_cutoff = jo.at("lj_cutoff").get<double>();
        return m;
    }
    const auto act = ad::activation_from_name(j.at("activation").get<std::string>());
    m.edge_net = ad::Mlp(j.at("edge_dims").get<std::vector<int>>(), act);
    const auto etheta = j.at("edge_theta").get<std::vector<double>>();
    if (etheta.size() != m.edge_net.n_params())
        throw DataError("checkpoint edge parameter count mismatch");
    std::copy(etheta.begin(), etheta.end(), m.edge_net.theta().begin());
    if (m.kind == ModelKind::Baseline) {
        m.node_net = ad::Mlp(j.at("node_dims").get<std::vector<int>>(), act);
        const auto ntheta = j.at("node_theta").get<std::vector<double>>();
        if (ntheta.size() != m.node_net.n_params())
            throw DataError("checkpoint node parameter count mismatch");
        std::copy(ntheta.begin(), ntheta.end(), m.node_net.theta().begin());
    }
    if (j.contains("node_scalars"))
        m.node_scalars = j.at("node_scalars").get<std::vector<double>>();
    return m;
}

} // namespace pairlearn::model
