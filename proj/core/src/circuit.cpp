#include "ringcirc/circuit.hpp"

#include <cmath>
#include <numeric>

#include "ringcirc/error.hpp"
#include "ringcirc/units.hpp"

namespace ringcirc {

namespace {

double mean(const std::array<double, 3>& v) { return (v[0] + v[1] + v[2]) / 3.0; }

double mass_unit(Variant v) { return v == Variant::QPS ? units::nano_henry : units::femto_farad; }

double zero_point_momentum(Variant v)
{
    return v == Variant::QPS ? units::flux_quantum : units::cooper_pair_charge;
}

void check_index(int k, const char* what)
{
    if (k < 0 || k > 2) {
        throw ConfigError(std::string(what) + " index must be 0, 1 or 2");
    }
}

} // namespace

std::string_view to_string(Variant v) { return v == Variant::QPS ? "QPS" : "JJ"; }

Variant variant_from_string(std::string_view name)
{
    if (name == "QPS" || name == "qps") {
        return Variant::QPS;
    }
    if (name == "JJ" || name == "jj") {
        return Variant::JJ;
    }
    throw ConfigError("unknown circuit variant '" + std::string(name) + "'");
}

void PhysicalSpec::validate() const
{
    for (int k = 0; k < 3; ++k) {
        if (!(tunnel_energy[k] >= 0.0)) {
            throw ConfigError("tunnel energies must be nonnegative");
        }
        if (!(junction_mass[k] > 0.0) || !(coupling_mass[k] > 0.0) || !(parasitic_mass[k] > 0.0)) {
            throw ConfigError("junction, coupling and parasitic masses must be strictly positive");
        }
    }
    if (line_param && !(*line_param > 0.0)) {
        throw ConfigError("line impedance parameter must be positive");
    }
    if (direct_coupling && !(*direct_coupling >= 0.0)) {
        throw ConfigError("direct coupling rate must be nonnegative");
    }
    if (!(reference_omega > 0.0)) {
        throw ConfigError("reference frequency must be positive");
    }
}

RingSpec dual_map(const PhysicalSpec& spec)
{
    spec.validate();

    RingSpec ring;
    ring.variant = spec.variant;
    ring.tunnel_energy = spec.tunnel_energy;

    // Junction k sits between node k and node (k+1) mod 3.
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (int node = 0; node < 3; ++node) {
        m(node, node) = spec.coupling_mass[node] + spec.parasitic_mass[node];
    }
    for (int k = 0; k < 3; ++k) {
        const int a = k;
        const int b = (k + 1) % 3;
        const double mt = spec.junction_mass[k];
        m(a, a) += mt;
        m(b, b) += mt;
        m(a, b) -= mt;
        m(b, a) -= mt;
    }
    ring.mass_tensor = m;

    Eigen::LLT<Eigen::Matrix3d> llt(m);
    if (llt.info() != Eigen::Success) {
        throw DegenerateCircuitError("degenerate circuit: mass tensor is not positive definite");
    }

    ring.p0 = zero_point_momentum(spec.variant);
    ring.kinetic_scale = ring.p0 * ring.p0 / (units::hbar * mass_unit(spec.variant)) / units::per_ns;
    ring.kinetic_tensor = ring.kinetic_scale * m.partialPivLu().inverse();
    ring.kinetic_tensor = 0.5 * (ring.kinetic_tensor + ring.kinetic_tensor.transpose()).eval();

    ring.m_sigma = m.diagonal().mean() + mean(spec.junction_mass);
    ring.e_sigma = ring.kinetic_scale / ring.m_sigma;

    const double mc = mean(spec.coupling_mass);
    for (int j = 0; j < 3; ++j) {
        ring.port_weight[j] = spec.coupling_mass[j] / mc;
    }
    return ring;
}

double coupling_strength(const PhysicalSpec& spec, double omega)
{
    if (!(omega > 0.0)) {
        throw ConfigError("coupling_strength: frequency must be positive");
    }
    if (spec.line_param.has_value() == spec.direct_coupling.has_value()) {
        throw ConfigError(
            "exactly one of line impedance parameter (L_r / C_r) and direct coupling rate must be set");
    }
    if (spec.direct_coupling) {
        return *spec.direct_coupling * std::sqrt(omega / spec.reference_omega);
    }

    // g/hbar = p0 (m_C / m_Sigma) sqrt(hbar omega / 2 m_r) / hbar
    const double unit = mass_unit(spec.variant);
    const double m_sigma = dual_map(spec).m_sigma;
    const double ratio = mean(spec.coupling_mass) / m_sigma;
    const double omega_si = omega * units::per_ns;
    const double line = *spec.line_param * unit;
    const double g_si = zero_point_momentum(spec.variant) * ratio
        * std::sqrt(units::hbar * omega_si / (2.0 * line)) / units::hbar;
    return g_si / units::per_ns;
}

PhysicalSpec preset(std::string_view name)
{
    PhysicalSpec spec;
    if (name == "tableS1-qps") {
        spec.variant = Variant::QPS;
        spec.tunnel_energy = {15.0, 15.0, 15.0};
        spec.junction_mass = {900.0, 900.0, 900.0};
        spec.coupling_mass = {100.0, 100.0, 100.0};
        spec.parasitic_mass = {2400.0, 2400.0, 2400.0};
    } else if (name == "tableS1-jj") {
        spec.variant = Variant::JJ;
        spec.tunnel_energy = {15.0, 15.0, 15.0};
        spec.junction_mass = {21.61, 21.61, 21.61};
        spec.coupling_mass = {2.40, 2.40, 2.40};
        spec.parasitic_mass = {57.63, 57.63, 57.63};
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    spec.direct_coupling = 1.832;
    spec.reference_omega = 12.293;
    return spec;
}

std::vector<std::string> preset_names() { return {"tableS1-qps", "tableS1-jj"}; }

PhysicalSpec with_tunnel_energy(PhysicalSpec spec, int junction, double relative)
{
    check_index(junction, "junction");
    spec.tunnel_energy[junction] *= 1.0 + relative;
    return spec;
}

PhysicalSpec with_junction_mass(PhysicalSpec spec, int junction, double relative)
{
    check_index(junction, "junction");
    spec.junction_mass[junction] *= 1.0 + relative;
    return spec;
}

PhysicalSpec with_parasitic_mass(PhysicalSpec spec, int node, double relative)
{
    check_index(node, "node");
    spec.parasitic_mass[node] *= 1.0 + relative;
    return spec;
}

} // namespace ringcirc
