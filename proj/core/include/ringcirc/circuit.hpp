#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ringcirc {

/// Physical realisation of the tunnelling elements.
///
/// QPS: segment numbers are fluxes in units of the flux quantum, masses are
/// inductances in nH, the central bias is a charge Q_x/2e.
/// JJ: segment numbers are charges in units of 2e, masses are capacitances
/// in fF, the central bias is a flux Phi_x/Phi_0.
enum class Variant { QPS, JJ };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

/// Circuit parameters of the three-junction ring.
///
/// Junction k couples node k to node k+1 (cyclically); coupling and parasitic
/// masses are per node. Energies are E/hbar in rad/ns.
struct PhysicalSpec {
    Variant variant = Variant::QPS;
    std::array<double, 3> tunnel_energy{};
    std::array<double, 3> junction_mass{};
    std::array<double, 3> coupling_mass{};
    std::array<double, 3> parasitic_mass{};
    /// Transmission line L_r (nH, QPS) or C_r (fF, JJ).
    std::optional<double> line_param;
    /// Waveguide coupling g at `reference_omega`, scaled as sqrt(omega).
    std::optional<double> direct_coupling;
    double reference_omega = 12.293;

    /// Throws ConfigError on non-positive masses or negative tunnel energies.
    void validate() const;

    bool operator==(const PhysicalSpec&) const = default;
};

/// Duality-neutral description of the ring: tunnel energies plus the mass tensor.
struct RingSpec {
    Variant variant = Variant::QPS;
    std::array<double, 3> tunnel_energy{};
    Eigen::Matrix3d mass_tensor = Eigen::Matrix3d::Identity();
    /// p0^2 / (hbar * unit mass) in rad/ns * (mass unit).
    double kinetic_scale = 0.0;
    /// kinetic_scale * M^{-1}; the kinetic energy is 1/2 d^T K d.
    Eigen::Matrix3d kinetic_tensor = Eigen::Matrix3d::Zero();
    /// Zero-point momentum in SI units (Wb for QPS, C for JJ).
    double p0 = 0.0;
    /// Effective total mass, mean(diag M) + mean(m_T); equals 3 m_T + m_C + m_G when symmetric.
    double m_sigma = 0.0;
    /// E_Sigma / hbar = kinetic_scale / m_sigma.
    double e_sigma = 0.0;
    /// m_C^(j) / mean(m_C): relative port coupling weights.
    std::array<double, 3> port_weight{1.0, 1.0, 1.0};
};

/// Central bias X and segment biases N_S^(k); n0 is the conserved total number.
struct BiasPoint {
    double x = 0.0;
    std::array<double, 3> segment{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    std::optional<int> n0;

    bool operator==(const BiasPoint&) const = default;
};

/// Builds the mass tensor of the ring from per-branch masses and inverts it.
/// Throws DegenerateCircuitError if the tensor is not positive definite.
RingSpec dual_map(const PhysicalSpec& spec);

/// Waveguide coupling |g_k| at angular frequency omega (rad/ns).
double coupling_strength(const PhysicalSpec& spec, double omega);

/// Built-in parameter sets: "tableS1-qps" and "tableS1-jj".
PhysicalSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// Junction tunnel energy / mass and node parasitic mass perturbations used by
/// the disorder studies. `relative` is a fractional change (0.01 = +1%).
PhysicalSpec with_tunnel_energy(PhysicalSpec spec, int junction, double relative);
PhysicalSpec with_junction_mass(PhysicalSpec spec, int junction, double relative);
PhysicalSpec with_parasitic_mass(PhysicalSpec spec, int node, double relative);

} // namespace ringcirc
