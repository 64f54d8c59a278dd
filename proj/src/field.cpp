#include "pairlearn/field.hpp"

#include "pairlearn/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace pairlearn::metrics {

double angle_between_2d(const double* a, const double* b)
{
    const double cross = a[0] * b[1] - a[1] * b[0];
    const double dot = a[0] * b[0] + a[1] * b[1];
    return std::fabs(std::atan2(cross, dot));
}

FieldGrid render_field(const model::Model& m, const sim::LawSpec& truth_law, const GridSpec& spec)
{
    if (m.layout.d != 2 || m.layout.has_disp)
        throw ConfigError("render_field: requires a 2D non-periodic model layout");
    if (spec.nx < 2 || spec.ny < 2)
        throw ConfigError("render_field: grid must be at least 2x2");

    FieldGrid grid;
    grid.spec = spec;
    grid.has_potential = m.message_dim() == 1;
    const int cells = grid.cells();
    grid.pred_force.assign(static_cast<std::size_t>(cells) * 2, 0.0);
    grid.true_force.assign(static_cast<std::size_t>(cells) * 2, 0.0);
    grid.mag_err.assign(cells, 0.0);
    grid.angle_err.assign(cells, 0.0);
    grid.skipped.assign(cells, 0);
    if (grid.has_potential) {
        grid.pred_pot.assign(cells, 0.0);
        grid.true_pot.assign(cells, 0.0);
    }

    // Probe (receiver) at the origin, at rest.
    sim::ParticleState probe;
    probe.m = spec.probe_mass;
    probe.q = spec.probe_charge;
    sim::ParticleState sender;
    sender.m = spec.sender_mass;
    sender.q = spec.sender_charge;

    const int node_len = m.layout.node_len();
    std::vector<double> x(m.layout.edge_input_len(), 0.0);
    const auto fill_node = [&](const sim::ParticleState& p, int at) {
        x[at + 0] = p.r[0];
        x[at + 1] = p.r[1];
        x[at + 2] = p.v[0];
        x[at + 3] = p.v[1];
        int off = at + 4;
        if (m.layout.has_charge)
            x[off++] = p.q;
        x[off] = p.m;
    };

    model::ModelWork work;
    ad::MlpWork& ew = work.edge_work;
    std::vector<double> g(m.layout.edge_input_len());

    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix) {
            const int cell = iy * spec.nx + ix;
            const double cx = spec.xmin + (spec.xmax - spec.xmin) * ix / (spec.nx - 1);
            const double cy = spec.ymin + (spec.ymax - spec.ymin) * iy / (spec.ny - 1);
            const double r = std::hypot(cx, cy);
            if (r < spec.skip_radius) {
                grid.skipped[cell] = 1;
                const double nan = std::numeric_limits<double>::quiet_NaN();
                grid.pred_force[2 * cell] = grid.pred_force[2 * cell + 1] = nan;
                grid.true_force[2 * cell] = grid.true_force[2 * cell + 1] = nan;
                grid.mag_err[cell] = nan;
                grid.angle_err[cell] = nan;
                if (grid.has_potential)
                    grid.pred_pot[cell] = grid.true_pot[cell] = nan;
                continue;
            }
            sender.r[0] = cx;
            sender.r[1] = cy;
            fill_node(probe, 0);
            fill_node(sender, node_len);

            double f_hat[2];
            if (m.is_oracle()) {
                double p_hat;
                model::oracle_pairwise(m, x, f_hat, &p_hat);
                if (grid.has_potential) {
                    grid.pred_pot[cell] = p_hat;
                    grid.true_pot[cell] = sim::pairwise_potential(truth_law, probe, sender, 2);
                }
            } else if (grid.has_potential) {
                double p_hat;
                ad::mlp_forward(m.edge_net, x, ew, { &p_hat, 1 });
                ad::mlp_input_gradient(m.edge_net, ew, g);
                f_hat[0] = -g[0];
                f_hat[1] = -g[1];
                grid.pred_pot[cell] = p_hat;
                grid.true_pot[cell] = sim::pairwise_potential(truth_law, probe, sender, 2);
            } else {
                ad::mlp_forward(m.edge_net, x, ew, { f_hat, 2 });
            }
            double f_true[2];
            sim::pairwise_force(truth_law, probe, sender, 2, f_true);

            grid.pred_force[2 * cell] = f_hat[0];
            grid.pred_force[2 * cell + 1] = f_hat[1];
            grid.true_force[2 * cell] = f_true[0];
            grid.true_force[2 * cell + 1] = f_true[1];
            grid.mag_err[cell] =
                std::fabs(std::hypot(f_hat[0], f_hat[1]) - std::hypot(f_true[0], f_true[1]));
            grid.angle_err[cell] = angle_between_2d(f_hat, f_true);
        }
    return grid;
}

void save_field_csv(const FieldGrid& grid, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out << "x,y,pred_fx,pred_fy,true_fx,true_fy";
    if (grid.has_potential)
        out << ",pred_p,true_p";
    out << ",mag_err,angle_err,skipped\n";
    out.precision(12);
    const auto& s = grid.spec;
    for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix) {
            const int cell = iy * s.nx + ix;
            const double cx = s.xmin + (s.xmax - s.xmin) * ix / (s.nx - 1);
            const double cy = s.ymin + (s.ymax - s.ymin) * iy / (s.ny - 1);
            out << cx << ',' << cy << ',' << grid.pred_force[2 * cell] << ','
                << grid.pred_force[2 * cell + 1] << ',' << grid.true_force[2 * cell] << ','
                << grid.true_force[2 * cell + 1];
            if (grid.has_potential)
                out << ',' << grid.pred_pot[cell] << ',' << grid.true_pot[cell];
            out << ',' << grid.mag_err[cell] << ',' << grid.angle_err[cell] << ','
                << static_cast<int>(grid.skipped[cell]) << '\n';
        }
}

} // namespace pairlearn::metrics
