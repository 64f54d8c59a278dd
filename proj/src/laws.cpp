#include "pairlearn/laws.hpp"

#include "pairlearn/errors.hpp"

#include <cmath>

namespace pairlearn::sim {

LawSpec LawSpec::spring(double k, double L)
{
    LawSpec s;
    s.kind = LawKind::Spring;
    s.k = k;
    s.L = L;
    return s;
}

LawSpec LawSpec::charge(double c, double delta)
{
    LawSpec s;
    s.kind = LawKind::Charge;
    s.c = c;
    s.delta = delta;
    return s;
}

LawSpec LawSpec::orbital(double delta)
{
    LawSpec s;
    s.kind = LawKind::Orbital;
    s.delta = delta;
    return s;
}

LawSpec LawSpec::discontinuous(double theta)
{
    LawSpec s;
    s.kind = LawKind::Discontinuous;
    s.theta = theta;
    return s;
}

LawSpec LawSpec::lennard_jones(double epsilon, double sigma, double cutoff)
{
    LawSpec s;
    s.kind = LawKind::LennardJones;
    s.lj_epsilon = epsilon;
    s.lj_sigma = sigma;
    s.lj_cutoff = cutoff;
    return s;
}

namespace {

double distance(const double* disp, int d)
{
    double acc = 0.0;
    for (int k = 0; k < d; ++k)
        acc += disp[k] * disp[k];
    return std::sqrt(acc);
}

// Scalar factor s such that F_ij = s * disp (disp = r_j - r_i); writing the
// force this way keeps F_ij / F_ji exactly antisymmetric since the two
// displacements are exact negations.
double force_scale(const LawSpec& law, double r, double q_i, double q_j, double m_i, double m_j)
{
    switch (law.kind) {
    case LawKind::Spring:
        return law.k * (r - law.L) / r;
    case LawKind::Charge: {
        const double rs = r + law.delta;
        return -law.c * q_i * q_j / (rs * rs) / r;
    }
    case LawKind::Orbital:
        return m_i * m_j / (r + law.delta) / r;
    case LawKind::Discontinuous:
        return r < law.theta ? 0.0 : (r - 1.0) / r;
    case LawKind::LennardJones: {
        const LjPair p = lj_pair(r, law.lj_epsilon, law.lj_sigma, law.lj_cutoff);
        return -p.force_magnitude / r;
    }
    }
    throw InvariantViolation("unknown law kind");
}

} // namespace

void law_force(const LawSpec& law, const double* disp, double q_i, double q_j, double m_i,
               double m_j, int d, double* f_out)
{
    const double r = distance(disp, d);
    if (r == 0.0) {
        // The Discontinuous law is flat below theta, so the direction is moot.
        if (law.kind == LawKind::Discontinuous && law.theta > 0.0) {
            for (int k = 0; k < d; ++k)
                f_out[k] = 0.0;
            return;
        }
        throw SingularityError("coincident particles: pairwise force undefined");
    }
    const double s = force_scale(law, r, q_i, q_j, m_i, m_j);
    for (int k = 0; k < d; ++k)
        f_out[k] = s * disp[k];
}

double law_potential(const LawSpec& law, const double* disp, double q_i, double q_j, double m_i,
                     double m_j, int d)
{
    const double r = distance(disp, d);
    switch (law.kind) {
    case LawKind::Spring: {
        const double x = r - law.L;
        return 0.5 * law.k * x * x;
    }
    case LawKind::Charge: {
        const double rs = r + law.delta;
        if (rs == 0.0)
            throw SingularityError("coincident particles with delta=0: potential singular");
        return law.c * q_i * q_j / rs;
    }
    case LawKind::Orbital: {
        const double rs = r + law.delta;
        if (rs == 0.0)
            throw SingularityError("coincident particles with delta=0: potential singular");
        return m_i * m_j * std::log(rs);
    }
    case LawKind::Discontinuous: {
        if (r < law.theta)
            return 0.0;
        const double x = r - 1.0;
        return 0.5 * x * x;
    }
    case LawKind::LennardJones:
        return lj_pair(r, law.lj_epsilon, law.lj_sigma, law.lj_cutoff).potential;
    }
    throw InvariantViolation("unknown law kind");
}

void pairwise_force(const LawSpec& law, const ParticleState& pi, const ParticleState& pj, int d,
                    double* f_out)
{
    double disp[3];
    for (int k = 0; k < d; ++k)
        disp[k] = pj.r[k] - pi.r[k];
    law_force(law, disp, pi.q, pj.q, pi.m, pj.m, d, f_out);
}

double pairwise_potential(const LawSpec& law, const ParticleState& pi, const ParticleState& pj,
                          int d)
{
    double disp[3];
    for (int k = 0; k < d; ++k)
        disp[k] = pj.r[k] - pi.r[k];
    return law_potential(law, disp, pi.q, pj.q, pi.m, pj.m, d);
}

LjPair lj_pair(double r, double epsilon, double sigma, double cutoff)
{
    if (r <= 0.0)
        throw SingularityError("lj_pair: non-positive distance");
    if (r >= cutoff)
        return { 0.0, 0.0 };
    const double sr = sigma / r;
    const double sr2 = sr * sr;
    const double sr6 = sr2 * sr2 * sr2;
    const double sr12 = sr6 * sr6;
    const double v = 4.0 * epsilon * (sr12 - sr6);
    // -dV/dr = 4*eps*(12*sr12 - 6*sr6)/r
    const double f = 4.0 * epsilon * (12.0 * sr12 - 6.0 * sr6) / r;
    return { v, f };
}

std::string_view law_name(LawKind kind)
{
    switch (kind) {
    case LawKind::Spring: return "spring";
    case LawKind::Charge: return "charge";
    case LawKind::Orbital: return "orbital";
    case LawKind::Discontinuous: return "discontinuous";
    case LawKind::LennardJones: return "lennard_jones";
    }
    return "?";
}

LawKind law_from_name(const std::string& name)
{
    if (name == "spring") return LawKind::Spring;
    if (name == "charge") return LawKind::Charge;
    if (name == "orbital") return LawKind::Orbital;
    if (name == "discontinuous" || name == "discnt") return LawKind::Discontinuous;
    if (name == "lennard_jones" || name == "lj") return LawKind::LennardJones;
    throw ConfigError("unknown law '" + name + "'");
}

} // namespace pairlearn::sim
