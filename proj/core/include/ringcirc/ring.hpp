#pragma once

#include <array>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "ringcirc/circuit.hpp"

namespace ringcirc {

/// Number-basis cutoff (n1', n2' in [-n_max, n_max]) and retained eigenmodes.
struct Truncation {
    int n_max = 4;
    int levels = 5;

    bool operator==(const Truncation&) const = default;
};

/// Energies closer than this (rad/ns) are treated as degenerate.
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Where the diagonal (and intra-degenerate-block) part of O_j goes when
/// splitting into q_+ and q_-.
enum class DiagonalAssignment {
    Excluded, ///< dropped: q_- is strictly energy lowering
    Lowering, ///< kept in q_-
};

/// Collective-coordinate states |n1', n2'> with n3' = N0 eliminated.
class NumberBasis {
public:
    explicit NumberBasis(int n_max);

    int n_max() const { return n_max_; }
    int side() const { return 2 * n_max_ + 1; }
    int dim() const { return side() * side(); }
    int index(int n1, int n2) const { return (n1 + n_max_) * side() + (n2 + n_max_); }
    std::pair<int, int> state(int i) const { return {i / side() - n_max_, i % side() - n_max_}; }
    bool contains(int n1, int n2) const
    {
        return n1 >= -n_max_ && n1 <= n_max_ && n2 >= -n_max_ && n2 <= n_max_;
    }

private:
    int n_max_;
};

/// Node numbers (n1, n2, n3) of the collective state |n1', n2'> in the N0 sector.
inline Eigen::Vector3d node_numbers(int n1p, int n2p, int n0)
{
    return {static_cast<double>(n1p), static_cast<double>(-n2p), static_cast<double>(n0 - n1p + n2p)};
}

/// H_Ring on an arbitrary list of |n1', n2'> states in the sector n1+n2+n3 = n0.
/// Shift operators acting outside the list are truncated.
Eigen::MatrixXcd hamiltonian_on_states(const RingSpec& ring, const BiasPoint& bias, int n0,
                                       std::span<const std::pair<int, int>> states);

/// H_Ring on the square (2 n_max + 1)^2 basis for a given conserved number.
Eigen::MatrixXcd hamiltonian_for_charge(const RingSpec& ring, const BiasPoint& bias, int n0, int n_max);

/// Ground-state value of n1+n2+n3 among the candidates -2..3.
int conserved_charge(const RingSpec& ring, const BiasPoint& bias, int n_max);

/// Resolves N0 (verifying any user-supplied value) and returns the bias with n0 set.
BiasPoint resolve_bias(const RingSpec& ring, BiasPoint bias, int n_max);

/// H_Ring with N0 resolved from the segment biases.
Eigen::MatrixXcd build_hamiltonian(const RingSpec& ring, const BiasPoint& bias, int n_max);

struct Spectrum {
    Eigen::VectorXd energies;   ///< ascending, rad/ns
    Eigen::MatrixXcd vectors;   ///< columns; largest-magnitude component real positive
};

/// Lowest `levels` eigenpairs of a Hermitian matrix.
Spectrum diagonalize(const Eigen::MatrixXcd& h, int levels);

struct PortOperators {
    std::array<Eigen::MatrixXcd, 3> full;     ///< <m|O_j|n>
    std::array<Eigen::MatrixXcd, 3> raising;  ///< q_+^(j): elements with E_m > E_n
    std::array<Eigen::MatrixXcd, 3> lowering; ///< q_-^(j): elements with E_m < E_n (+ diagonal if assigned)
};

/// Port coupling operators O_j = m_Sigma w_j [M^{-1}(n - N_S)]_j in the ring eigenbasis.
/// For the symmetric ring O_1 = n1' + N1', O_2 = -n2' + N2', O_3 = -n1' + n2' + N3'.
/// `bias.n0` must be set.
PortOperators port_operators(const RingSpec& ring, const BiasPoint& bias, int n_max,
                             const Spectrum& spectrum,
                             DiagonalAssignment diagonal = DiagonalAssignment::Excluded);

/// Effective constant offsets N^(j)' of the port operators (diagonal in the number basis).
std::array<double, 3> effective_port_bias(const RingSpec& ring, const BiasPoint& bias);

/// Truncated ring eigenproblem plus port operators, everything needed by the dynamics.
struct RingEigensystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
    PortOperators ports;
    Truncation truncation;
    BiasPoint bias; ///< with n0 resolved

    int levels() const { return static_cast<int>(energies.size()); }
    /// E_m - E_0
    Eigen::VectorXd excitation_energies() const { return energies.array() - energies(0); }
};

RingEigensystem solve_ring(const RingSpec& ring, const BiasPoint& bias, const Truncation& truncation,
                           DiagonalAssignment diagonal = DiagonalAssignment::Excluded);

} // namespace ringcirc
