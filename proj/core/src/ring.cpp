#include "ringcirc/ring.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "ringcirc/error.hpp"

namespace ringcirc {

namespace {

using cplx = std::complex<double>;

constexpr int kMinCharge = -2;
constexpr int kMaxCharge = 3;

double kinetic_energy(const RingSpec& ring, const BiasPoint& bias, int n0, int n1p, int n2p)
{
    const Eigen::Vector3d d = node_numbers(n1p, n2p, n0)
        - Eigen::Vector3d(bias.segment[0], bias.segment[1], bias.segment[2]);
    return 0.5 * d.dot(ring.kinetic_tensor * d);
}

std::vector<std::pair<int, int>> square_states(int n_max)
{
    const NumberBasis basis(n_max);
    std::vector<std::pair<int, int>> states;
    states.reserve(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) {
        states.push_back(basis.state(i));
    }
    return states;
}

double lowest_eigenvalue(const Eigen::MatrixXcd& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw EigensolverError("eigensolver failed to converge while selecting N0");
    }
    return solver.eigenvalues()(0);
}

} // namespace

NumberBasis::NumberBasis(int n_max) : n_max_(n_max)
{
    if (n_max < 1) {
        throw ConfigError("n_max must be at least 1");
    }
}

Eigen::MatrixXcd hamiltonian_on_states(const RingSpec& ring, const BiasPoint& bias, int n0,
                                       std::span<const std::pair<int, int>> states)
{
    const auto dim = static_cast<Eigen::Index>(states.size());
    std::map<std::pair<int, int>, Eigen::Index> lookup;
    for (Eigen::Index i = 0; i < dim; ++i) {
        lookup.emplace(states[i], i);
    }

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const double phase_angle = 2.0 * std::numbers::pi * bias.x / 3.0;
    const cplx forward = std::polar(1.0, -phase_angle);

    // Shift terms, each added with its Hermitian conjugate:
    //   junction 3 (nodes 3-1): cos 2pi(x1' - X/3)       -> n1' + 1,  e^{-i 2pi X/3}
    //   junction 2 (nodes 2-3): cos 2pi(x2' - X/3)       -> n2' + 1,  e^{-i 2pi X/3}
    //   junction 1 (nodes 1-2): cos 2pi(x1' + x2' + X/3) -> both + 1, e^{+i 2pi X/3}
    struct Shift {
        int d1;
        int d2;
        double energy;
        cplx phase;
    };
    const std::array<Shift, 3> shifts{{
        {1, 0, ring.tunnel_energy[2], forward},
        {0, 1, ring.tunnel_energy[1], forward},
        {1, 1, ring.tunnel_energy[0], std::conj(forward)},
    }};

    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto [a, b] = states[i];
        h(i, i) = kinetic_energy(ring, bias, n0, a, b);
        for (const Shift& s : shifts) {
            const auto it = lookup.find({a + s.d1, b + s.d2});
            if (it == lookup.end()) {
                continue;
            }
            const cplx element = -0.5 * s.energy * s.phase;
            h(it->second, i) += element;
            h(i, it->second) += std::conj(element);
        }
    }
    return h;
}

Eigen::MatrixXcd hamiltonian_for_charge(const RingSpec& ring, const BiasPoint& bias, int n0, int n_max)
{
    const auto states = square_states(n_max);
    return hamiltonian_on_states(ring, bias, n0, states);
}

int conserved_charge(const RingSpec& ring, const BiasPoint& bias, int n_max)
{
    int best = kMinCharge;
    double best_energy = std::numeric_limits<double>::infinity();
    for (int n0 = kMinCharge; n0 <= kMaxCharge; ++n0) {
        const double e = lowest_eigenvalue(hamiltonian_for_charge(ring, bias, n0, n_max));
        if (e < best_energy) {
            best_energy = e;
            best = n0;
        }
    }
    return best;
}

BiasPoint resolve_bias(const RingSpec& ring, BiasPoint bias, int n_max)
{
    const int n0 = conserved_charge(ring, bias, n_max);
    if (bias.n0 && *bias.n0 != n0) {
        throw ConfigError("conserved number N0=" + std::to_string(*bias.n0)
                          + " does not match the ground-state value " + std::to_string(n0)
                          + " for these segment biases");
    }
    bias.n0 = n0;
    return bias;
}

Eigen::MatrixXcd build_hamiltonian(const RingSpec& ring, const BiasPoint& bias, int n_max)
{
    if (n_max < 2) {
        throw ConfigError("build_hamiltonian requires n_max >= 2");
    }
    const BiasPoint resolved = resolve_bias(ring, bias, n_max);
    return hamiltonian_for_charge(ring, resolved, *resolved.n0, n_max);
}

Spectrum diagonalize(const Eigen::MatrixXcd& h, int levels)
{
    if (levels < 1 || levels > h.rows()) {
        throw ConfigError("diagonalize: number of levels must be in [1, dim(H)]");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) {
        throw EigensolverError("eigensolver did not converge (dim " + std::to_string(h.rows()) + ")");
    }

    Spectrum out;
    out.energies = solver.eigenvalues().head(levels);
    out.vectors = solver.eigenvectors().leftCols(levels);
    for (int k = 0; k < levels; ++k) {
        Eigen::Index pivot = 0;
        out.vectors.col(k).cwiseAbs().maxCoeff(&pivot);
        const cplx c = out.vectors(pivot, k);
        out.vectors.col(k) *= std::conj(c) / std::abs(c);
    }
    return out;
}

std::array<double, 3> effective_port_bias(const RingSpec& ring, const BiasPoint& bias)
{
    if (!bias.n0) {
        throw ConfigError("effective_port_bias: N0 not resolved");
    }
    const Eigen::Vector3d d = node_numbers(0, 0, *bias.n0)
        - Eigen::Vector3d(bias.segment[0], bias.segment[1], bias.segment[2]);
    const Eigen::Vector3d r = ring.kinetic_tensor * d / ring.kinetic_scale;
    std::array<double, 3> out{};
    for (int j = 0; j < 3; ++j) {
        out[j] = ring.m_sigma * ring.port_weight[j] * r(j);
    }
    return out;
}

PortOperators port_operators(const RingSpec& ring, const BiasPoint& bias, int n_max,
                             const Spectrum& spectrum, DiagonalAssignment diagonal)
{
    if (!bias.n0) {
        throw ConfigError("port_operators: N0 not resolved");
    }
    const NumberBasis basis(n_max);
    if (spectrum.vectors.rows() != basis.dim()) {
        throw ConfigError("port_operators: eigenvectors do not match the number basis");
    }

    const Eigen::Vector3d segment(bias.segment[0], bias.segment[1], bias.segment[2]);
    const Eigen::Matrix3d inverse_mass = ring.kinetic_tensor / ring.kinetic_scale;
    Eigen::MatrixXd number_diag(basis.dim(), 3);
    for (int i = 0; i < basis.dim(); ++i) {
        const auto [a, b] = basis.state(i);
        const Eigen::Vector3d r = inverse_mass * (node_numbers(a, b, *bias.n0) - segment);
        for (int j = 0; j < 3; ++j) {
            number_diag(i, j) = ring.m_sigma * ring.port_weight[j] * r(j);
        }
    }

    const Eigen::Index levels = spectrum.energies.size();
    PortOperators ops;
    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd o = spectrum.vectors.adjoint() * number_diag.col(j).asDiagonal() * spectrum.vectors;
        ops.full[j] = o;
        ops.raising[j] = Eigen::MatrixXcd::Zero(levels, levels);
        ops.lowering[j] = Eigen::MatrixXcd::Zero(levels, levels);
        for (Eigen::Index m = 0; m < levels; ++m) {
            for (Eigen::Index n = 0; n < levels; ++n) {
                const double gap = spectrum.energies(m) - spectrum.energies(n);
                if (std::abs(gap) < kDegeneracyTolerance) {
                    if (diagonal == DiagonalAssignment::Lowering) {
                        ops.lowering[j](m, n) = o(m, n);
                    }
                } else if (gap < 0.0) {
                    ops.lowering[j](m, n) = o(m, n);
                } else {
                    ops.raising[j](m, n) = o(m, n);
                }
            }
        }
    }
    return ops;
}

RingEigensystem solve_ring(const RingSpec& ring, const BiasPoint& bias, const Truncation& truncation,
                           DiagonalAssignment diagonal)
{
    if (truncation.n_max < 2) {
        throw ConfigError("truncation n_max must be >= 2");
    }
    const BiasPoint resolved = resolve_bias(ring, bias, truncation.n_max);
    const Eigen::MatrixXcd h = hamiltonian_for_charge(ring, resolved, *resolved.n0, truncation.n_max);
    Spectrum spectrum = diagonalize(h, truncation.levels);

    RingEigensystem sys;
    sys.ports = port_operators(ring, resolved, truncation.n_max, spectrum, diagonal);
    sys.energies = std::move(spectrum.energies);
    sys.vectors = std::move(spectrum.vectors);
    sys.truncation = truncation;
    sys.bias = resolved;
    return sys;
}

} // namespace ringcirc
