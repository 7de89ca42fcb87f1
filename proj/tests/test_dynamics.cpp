#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "ringcirc/dynamics.hpp"
#include "ringcirc/units.hpp"

using namespace ringcirc;

namespace {

constexpr double kOmega = 11.84;

const RingEigensystem& operating_ring()
{
    static const RingEigensystem sys = [] {
        BiasPoint b;
        b.x = 0.37;
        return solve_ring(dual_map(preset("tableS1-qps")), b, {4, 5});
    }();
    return sys;
}

CollapseOperators drive_port(int port, double flux, double omega = kOmega, double g = 1.832)
{
    DriveSpec d;
    d.omega = omega;
    d.g = g * std::sqrt(omega / 12.293);
    d.alpha[port] = std::sqrt(flux);
    return collapse_ops(operating_ring(), d);
}

DensityMatrix random_state(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = {normal(rng), normal(rng)};
        }
    }
    DensityMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

const double kWeakFlux = units::dbm_to_flux(-180.0, kOmega);

} // namespace

TEST(CollapseOps, DecoupledPortIsPureDisplacement)
{
    const CollapseOperators ops = drive_port(1, 0.3, kOmega, 0.0);
    const DensityMatrix rho = random_state(5, 7);
    const OutputFluxes f = output_fluxes(rho, ops, 0.8);
    EXPECT_NEAR(f.flux[1], 0.3, 1e-14);
    EXPECT_EQ(f.flux[0], 0.0);
    EXPECT_LT(std::abs(f.beta[1] - std::sqrt(0.3) * std::polar(1.0, -kOmega * 0.8)), 1e-14);
    EXPECT_TRUE(ops.drive_hamiltonian(0.3).isZero(0.0));
}

TEST(CollapseOps, UndrivenRingIsDark)
{
    DriveSpec d;
    d.omega = kOmega;
    d.g = 1.8;
    const CollapseOperators ops = collapse_ops(operating_ring(), d);
    EXPECT_TRUE(ops.drive_hamiltonian(1.0).isZero(0.0));
    const OutputFluxes f = output_fluxes(ground_state(5), ops, 0.0);
    for (int j = 0; j < 3; ++j) {
        EXPECT_EQ(f.flux[j], 0.0);
    }
    const SteadyStateResult st = steady_state_rotating_frame(operating_ring().energies, ops);
    EXPECT_NEAR(st.populations(0), 1.0, 1e-12);
}

TEST(CollapseOps, SignalChannelCarriesExcitedToGroundTransitions)
{
    const CollapseOperators ops = drive_port(0, kWeakFlux);
    EXPECT_EQ(ops.manifold(0), 0.0);
    for (int m = 1; m < 5; ++m) {
        EXPECT_EQ(ops.manifold(m), 1.0);
    }
    for (int j = 0; j < 3; ++j) {
        EXPECT_TRUE(ops.emission[j].rightCols(4).bottomRows(4).isZero(0.0));
        EXPECT_TRUE(ops.offband[j].row(0).isZero(0.0));
        EXPECT_FALSE(ops.emission[j].row(0).isZero(0.0));
        const Eigen::MatrixXcd h = ops.drive_hamiltonian(0.37);
        EXPECT_LT((h - h.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    }
    DriveSpec bad;
    EXPECT_THROW(collapse_ops(operating_ring(), bad), ConfigError);
}

TEST(Liouvillian, PreservesTrace)
{
    const CollapseOperators ops = drive_port(0, 0.05);
    const Eigen::MatrixXcd l = rotating_frame_liouvillian(operating_ring().energies, ops);
    const Eigen::VectorXcd vec_identity = Eigen::Map<const Eigen::VectorXcd>(Eigen::MatrixXcd::Identity(5, 5).eval().data(), 25);
    EXPECT_LT((vec_identity.adjoint() * l).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RotatingFrame, SteadyStateIsAValidDensityMatrix)
{
    for (double flux : {kWeakFlux, 0.01, 1.0}) {
        const SteadyStateResult st = steady_state_rotating_frame(operating_ring().energies, drive_port(0, flux));
        EXPECT_NEAR(st.rho.trace().real(), 1.0, 1e-12);
        EXPECT_LT((st.rho - st.rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(st.rho);
        EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
        EXPECT_NEAR(st.populations.sum(), 1.0, 1e-8);
        for (double b : st.flux) {
            EXPECT_GE(b, 0.0);
        }
        EXPECT_LT(st.convergence.residual, 1e-10);
    }
}

TEST(RotatingFrame, DegenerateNullSpaceIsReported)
{
    CollapseOperators ops;
    ops.omega = 10.0;
    ops.manifold = Eigen::Vector3d(0.0, 1.0, 1.0);
    for (int j = 0; j < 3; ++j) {
        ops.emission[j] = Eigen::MatrixXcd::Zero(3, 3);
        ops.offband[j] = Eigen::MatrixXcd::Zero(3, 3);
    }
    ops.emission[0](0, 1) = 1.0; // level 2 is decoupled: two steady states
    try {
        steady_state_rotating_frame(Eigen::Vector3d(0.0, 10.0, 20.0), ops);
        FAIL() << "expected DegeneracyError";
    } catch (const DegeneracyError& e) {
        EXPECT_EQ(e.null_dimension(), 2);
    }
    Eigen::VectorXd too_many = Eigen::VectorXd::LinSpaced(9, 0.0, 8.0);
    CollapseOperators big = ops;
    big.manifold = Eigen::VectorXd::Ones(9);
    EXPECT_THROW(steady_state_rotating_frame(too_many, big), ConfigError);
}

TEST(RotatingFrame, WeakDriveConservesFlux)
{
    for (int port = 0; port < 3; ++port) {
        const SteadyStateResult st = steady_state_rotating_frame(operating_ring().energies, drive_port(port, kWeakFlux));
        EXPECT_NEAR((st.flux[0] + st.flux[1] + st.flux[2]) / kWeakFlux, 1.0, 1e-3);
    }
}

TEST(RotatingFrame, LinearBelowCompression)
{
    const double f0 = units::dbm_to_flux(-200.0, kOmega);
    const SteadyStateResult a = steady_state_rotating_frame(operating_ring().energies, drive_port(0, f0));
    const SteadyStateResult b = steady_state_rotating_frame(operating_ring().energies, drive_port(0, 100.0 * f0));
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(b.flux[j] / (100.0 * a.flux[j]), 1.0, 1e-2) << j;
    }
}

TEST(TimeDomain, DarkStateIsStationary)
{
    DriveSpec d;
    d.omega = kOmega;
    d.g = 1.8;
    const CollapseOperators ops = collapse_ops(operating_ring(), d);
    const Trajectory tr = evolve_time_domain(ground_state(5), operating_ring().energies, ops, 0.0, 5.0, 0.5);
    ASSERT_EQ(tr.samples.size(), 11u);
    for (const auto& s : tr.samples) {
        EXPECT_LT((s.rho - ground_state(5)).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(TimeDomain, RingUpPreservesTraceAndPositivity)
{
    const double flux = units::dbm_to_flux(-130.0, kOmega);
    const CollapseOperators ops = drive_port(0, flux);
    const Trajectory tr = evolve_time_domain(ground_state(5), operating_ring().energies, ops, 0.0, 20.0, 0.05);
    EXPECT_LT(tr.max_trace_error, 1e-7);
    EXPECT_GT(tr.min_eigenvalue, -1e-6);
    double outside = 0.0;
    for (const auto& s : tr.samples) {
        EXPECT_LT((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
        outside = std::max(outside, s.populations.tail(2).sum());
    }
    EXPECT_LT(outside, 1e-2);
    EXPECT_GT(tr.samples.back().populations.segment(1, 2).sum(), 1e-6);
}

TEST(TimeDomain, AgreesWithRotatingFrame)
{
    for (double detuning : {-0.2, 0.0, 0.2}) {
        const CollapseOperators ops = drive_port(0, kWeakFlux, kOmega + detuning);
        const SteadyStateResult rf = steady_state_rotating_frame(operating_ring().energies, ops);
        const SteadyStateResult td = steady_state_time_domain(operating_ring().energies, ops);
        EXPECT_TRUE(td.convergence.converged);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(td.flux[j], rf.flux[j], 1e-3 * std::max(rf.flux[j], 1e-3 * kWeakFlux)) << detuning << " " << j;
        }
        EXPECT_LT((td.rho - rf.rho).cwiseAbs().maxCoeff(), 1e-3 * kWeakFlux + 1e-9);
    }
}

TEST(TimeDomain, DetunedDriveConservesFlux)
{
    const SteadyStateResult td = steady_state_time_domain(operating_ring().energies, drive_port(0, kWeakFlux, kOmega + 1.0));
    EXPECT_NEAR((td.flux[0] + td.flux[1] + td.flux[2]) / kWeakFlux, 1.0, 1e-3);
}

TEST(TimeDomain, GivesUpWithPartialTrajectory)
{
    TimeDomainOptions opts;
    opts.max_time = 3.0;
    try {
        steady_state_time_domain(operating_ring().energies, drive_port(0, 0.01), opts);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        ASSERT_NE(e.partial(), nullptr);
        EXPECT_FALSE(e.partial()->samples.empty());
        EXPECT_GT(e.partial()->samples.back().t, 2.0);
    }
    EXPECT_THROW(evolve_time_domain(ground_state(5), operating_ring().energies, drive_port(0, 0.01), 1.0, 1.0, 0.1),
                 ConfigError);
}
