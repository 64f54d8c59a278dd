#include "pairlearn/trajectory.hpp"

#include "pairlearn/errors.hpp"
#include "pairlearn/lj.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace pairlearn::sim {

using nlohmann::json;

void Trajectory::edge_force(int t, int i, int j, double* f_out) const
{
    if (has_stored_labels() && !periodic()) {
        const int e = full_edge_index(n, i, j);
        const std::size_t base =
            (static_cast<std::size_t>(t) * full_edge_count() + e) * d;
        for (int k = 0; k < d; ++k)
            f_out[k] = edge_forces[base + k];
        return;
    }
    const auto p = pos(t);
    double disp[3];
    for (int k = 0; k < d; ++k)
        disp[k] = p[static_cast<std::size_t>(j) * d + k] - p[static_cast<std::size_t>(i) * d + k];
    if (periodic())
        wrap_displacement(disp, box_length, d);
    law_force(law, disp, charges[i], charges[j], masses[i], masses[j], d, f_out);
}

double Trajectory::edge_potential(int t, int i, int j) const
{
    if (has_stored_labels() && !periodic()) {
        const int e = full_edge_index(n, i, j);
        return edge_potentials[static_cast<std::size_t>(t) * full_edge_count() + e];
    }
    const auto p = pos(t);
    double disp[3];
    for (int k = 0; k < d; ++k)
        disp[k] = p[static_cast<std::size_t>(j) * d + k] - p[static_cast<std::size_t>(i) * d + k];
    if (periodic())
        wrap_displacement(disp, box_length, d);
    return law_potential(law, disp, charges[i], charges[j], masses[i], masses[j], d);
}

namespace {

constexpr char magic[8] = { 'P', 'L', 'T', 'R', 'A', 'J', '0', '1' };

void write_doubles(std::ofstream& out, const std::vector<double>& v)
{
    const std::uint64_t count = v.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in)
{
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in)
        throw DataError("trajectory file truncated");
    return v;
}

json law_to_json(const LawSpec& law)
{
    return json{ { "kind", std::string(law_name(law.kind)) },
                 { "k", law.k },
                 { "L", law.L },
                 { "c", law.c },
                 { "delta", law.delta },
                 { "theta", law.theta },
                 { "lj_epsilon", law.lj_epsilon },
                 { "lj_sigma", law.lj_sigma },
                 { "lj_cutoff", law.lj_cutoff } };
}

LawSpec law_from_json(const json& j)
{
    LawSpec law;
    law.kind = law_from_name(j.at("kind").get<std::string>());
    law.k = j.at("k").get<double>();
    law.L = j.at("L").get<double>();
    law.c = j.at("c").get<double>();
    law.delta = j.at("delta").get<double>();
    law.theta = j.at("theta").get<double>();
    law.lj_epsilon = j.at("lj_epsilon").get<double>();
    law.lj_sigma = j.at("lj_sigma").get<double>();
    law.lj_cutoff = j.at("lj_cutoff").get<double>();
    return law;
}

} // namespace

void save_trajectory(const Trajectory& traj, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    out.write(magic, sizeof(magic));

    json header{
        { "law", law_to_json(traj.law) },
        { "d", traj.d },
        { "n", traj.n },
        { "steps", traj.steps() },
        { "dt", traj.dt },
        { "seed", traj.seed },
        { "box_length", traj.box_length },
        { "units", traj.units == UnitsKind::AngstromPsDalton ? "angstrom_ps_dalton"
                                                             : "dimensionless" },
        { "labels", traj.has_stored_labels() },
    };
    const std::string htext = header.dump();
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));

    write_doubles(out, traj.masses);
    write_doubles(out, traj.charges);
    write_doubles(out, traj.positions);
    write_doubles(out, traj.velocities);
    write_doubles(out, traj.accelerations);
    if (traj.has_stored_labels()) {
        write_doubles(out, traj.edge_forces);
        write_doubles(out, traj.edge_potentials);
    }
    if (!out)
        throw DataError("failed writing '" + path + "'");
}

Trajectory load_trajectory(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open trajectory '" + path + "'");
    char m[8];
    in.read(m, sizeof(m));
    if (!in || std::memcmp(m, magic, sizeof(magic)) != 0)
        throw DataError("'" + path + "' is not a trajectory container (bad magic)");
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in)
        throw DataError("trajectory header truncated");
    json header = json::parse(htext);

    Trajectory traj;
    traj.law = law_from_json(header.at("law"));
    traj.d = header.at("d").get<int>();
    traj.n = header.at("n").get<int>();
    traj.dt = header.at("dt").get<double>();
    traj.seed = header.at("seed").get<std::uint64_t>();
    traj.box_length = header.at("box_length").get<double>();
    traj.units = header.at("units").get<std::string>() == "angstrom_ps_dalton"
                     ? UnitsKind::AngstromPsDalton
                     : UnitsKind::Dimensionless;

    traj.masses = read_doubles(in);
    traj.charges = read_doubles(in);
    traj.positions = read_doubles(in);
    traj.velocities = read_doubles(in);
    traj.accelerations = read_doubles(in);
    if (header.at("labels").get<bool>()) {
        traj.edge_forces = read_doubles(in);
        traj.edge_potentials = read_doubles(in);
    }
    const int steps = header.at("steps").get<int>();
    if (traj.steps() != steps)
        throw DataError("trajectory body inconsistent with header step count");
    return traj;
}

void export_trajectory_jsonl(const Trajectory& traj, const std::string& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot open '" + path + "' for writing");
    json header{
        { "record", "header" },
        { "law", law_to_json(traj.law) },
        { "d", traj.d },
        { "n", traj.n },
        { "steps", traj.steps() },
        { "dt", traj.dt },
        { "seed", traj.seed },
        { "box_length", traj.box_length },
        { "masses", traj.masses },
        { "charges", traj.charges },
    };
    out << header.dump() << '\n';
    const int T = traj.steps();
    for (int t = 0; t < T; ++t) {
        json rec{ { "record", "step" }, { "t", t } };
        const auto slice = [&](std::span<const double> a) {
            return std::vector<double>(a.begin(), a.end());
        };
        rec["r"] = slice(traj.pos(t));
        rec["v"] = slice(traj.vel(t));
        rec["a"] = slice(traj.acc(t));
        out << rec.dump() << '\n';
    }
}

} // namespace pairlearn::sim
