#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ringcirc/error.hpp"
#include "ringcirc/ring.hpp"

namespace ringcirc {

using cplx = std::complex<double>;
using DensityMatrix = Eigen::MatrixXcd;

/// Coherent drive: per-port amplitudes (sqrt(photons/ns)), signal frequency and coupling.
struct DriveSpec {
    double omega = 0.0;
    std::array<cplx, 3> alpha{};
    double g = 0.0;
};

/// SLH collapse operators of the driven ring, split by how they rotate with the drive.
///
/// Port j emits into its signal channel b_j(t) = emission[j] + alpha_j e^{-i omega t},
/// where emission[j] = g q^(j) keeps the lowering transitions from the excited manifold
/// into the ground manifold. Lowering transitions inside a manifold go to the
/// off-band operator offband[j], weighted by sqrt(omega_mn / omega).
/// The drive Hamiltonian is H_D = -(i/2) sum_j (alpha_j e^{-i omega t} emission[j]^dag - h.c.).
struct CollapseOperators {
    std::array<Eigen::MatrixXcd, 3> emission;
    std::array<cplx, 3> displacement{};
    std::array<Eigen::MatrixXcd, 3> offband;
    double omega = 0.0;
    /// Rotating-frame generator omega * diag(manifold): 0 for the ground manifold, 1 otherwise.
    Eigen::VectorXd manifold;

    int levels() const { return static_cast<int>(manifold.size()); }

    /// b_j(t) in the lab frame.
    Eigen::MatrixXcd signal(int port, double t) const;
    /// H_D(t) in the lab frame.
    Eigen::MatrixXcd drive_hamiltonian(double t) const;
    /// Time-independent H_D in the frame rotating with omega * diag(manifold).
    Eigen::MatrixXcd rotating_drive_hamiltonian() const;
};

CollapseOperators collapse_ops(const RingEigensystem& ring, const DriveSpec& drive);

struct Convergence {
    std::string method;
    long iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

struct SteadyStateResult {
    DensityMatrix rho;                   ///< rotating frame, equal to the lab frame at t = 0
    std::array<cplx, 3> beta{};          ///< output amplitudes at t = 0
    std::array<double, 3> flux{};        ///< signal-channel output fluxes B_j (photons/ns)
    std::array<double, 3> offband_flux{};
    Eigen::VectorXd populations;
    Convergence convergence;
};

/// beta_j = Tr{b_j rho}, B_j = Tr{b_j^dag b_j rho} at lab time t.
struct OutputFluxes {
    std::array<cplx, 3> beta{};
    std::array<double, 3> flux{};
};
OutputFluxes output_fluxes(const DensityMatrix& rho, const CollapseOperators& ops, double t);

struct TrajectorySample {
    double t = 0.0;
    DensityMatrix rho;
    std::array<cplx, 3> beta{};
    std::array<double, 3> flux{};
    Eigen::VectorXd populations;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    long steps = 0;
    double max_trace_error = 0.0;
    double min_eigenvalue = 0.0;
};

struct IntegratorOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    /// Maximum tolerated |Tr rho - 1| at any sample.
    double trace_tol = 1e-7;
    double initial_step = 1e-3;
};

/// Solver gave up: step-size underflow, trace drift, or no steady state within the time budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::shared_ptr<const Trajectory> partial = nullptr)
        : Error(what), partial_(std::move(partial)) {}
    const Trajectory* partial() const noexcept { return partial_.get(); }

private:
    std::shared_ptr<const Trajectory> partial_;
};

/// Integrates the lab-frame master equation
///   d rho/dt = -i[H_Ring + H_D(t), rho] + sum_j D[b_j(t)] rho + sum_j D[c_j] rho
/// with adaptive Dormand-Prince 5(4), sampling every `sample_dt` in [t0, t1].
/// `energies` are the ring eigenenergies (H_Ring = diag(energies)).
Trajectory evolve_time_domain(const DensityMatrix& rho0, const Eigen::VectorXd& energies,
                              const CollapseOperators& ops, double t0, double t1, double sample_dt,
                              const IntegratorOptions& options = {});

struct TimeDomainOptions {
    IntegratorOptions integrator;
    /// Relative change of the period-averaged fluxes regarded as stationary.
    double tol = 1e-6;
    int stable_periods = 20;
    int samples_per_period = 16;
    double max_time = 400.0; // ns
};

/// Evolves from the ring ground state until the drive-period-averaged fluxes are stationary.
SteadyStateResult steady_state_time_domain(const Eigen::VectorXd& energies, const CollapseOperators& ops,
                                           const TimeDomainOptions& options = {});

/// Null space of the rotating-frame Liouvillian. Throws DegeneracyError unless it is one-dimensional.
SteadyStateResult steady_state_rotating_frame(const Eigen::VectorXd& energies, const CollapseOperators& ops);

/// Rotating-frame Liouvillian acting on column-stacked vec(rho).
Eigen::MatrixXcd rotating_frame_liouvillian(const Eigen::VectorXd& energies, const CollapseOperators& ops);

DensityMatrix ground_state(int levels);

} // namespace ringcirc
