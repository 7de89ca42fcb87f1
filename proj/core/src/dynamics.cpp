#include "ringcirc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

namespace ringcirc {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<cplx>;

constexpr cplx I{0.0, 1.0};

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

void add_dissipator(Eigen::MatrixXcd& liouvillian, const Eigen::MatrixXcd& jump)
{
    const auto n = jump.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd jj = jump.adjoint() * jump;
    liouvillian += kron(jump.conjugate(), jump) - 0.5 * kron(id, jj) - 0.5 * kron(jj.transpose(), id);
}

bool is_decoupled(const CollapseOperators& ops)
{
    for (int j = 0; j < 3; ++j) {
        if (!ops.emission[j].isZero(0.0) || !ops.offband[j].isZero(0.0)) {
            return false;
        }
    }
    return true;
}

double total_input(const CollapseOperators& ops)
{
    double s = 0.0;
    for (const cplx& a : ops.displacement) {
        s += std::norm(a);
    }
    return s;
}

void fill_outputs(SteadyStateResult& out, const CollapseOperators& ops)
{
    const OutputFluxes f = output_fluxes(out.rho, ops, 0.0);
    out.beta = f.beta;
    out.flux = f.flux;
    for (int j = 0; j < 3; ++j) {
        out.offband_flux[j] = (ops.offband[j].adjoint() * ops.offband[j] * out.rho).trace().real();
    }
    out.populations = out.rho.diagonal().real();
}

double min_eigenvalue(const DensityMatrix& rho)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

/// Lab-frame master equation on a column-stacked density matrix.
class MasterEquation {
public:
    MasterEquation(const Eigen::VectorXd& energies, const CollapseOperators& ops)
        : ops_(ops), levels_(ops.levels()),
          ring_(Eigen::VectorXd(energies.array() - energies(0)).cast<cplx>().asDiagonal())
    {
        offband_rate_ = Eigen::MatrixXcd::Zero(levels_, levels_);
        for (int j = 0; j < 3; ++j) {
            offband_rate_ += ops_.offband[j].adjoint() * ops_.offband[j];
        }
    }

    void operator()(const State& x, State& dxdt, double t) const
    {
        const Eigen::Map<const Eigen::MatrixXcd> rho(x.data(), levels_, levels_);
        Eigen::Map<Eigen::MatrixXcd> d(dxdt.data(), levels_, levels_);

        const Eigen::MatrixXcd h = ring_ + ops_.drive_hamiltonian(t);
        Eigen::MatrixXcd effective = h - 0.5 * I * offband_rate_;
        Eigen::MatrixXcd jumps = Eigen::MatrixXcd::Zero(levels_, levels_);
        for (int j = 0; j < 3; ++j) {
            const Eigen::MatrixXcd b = ops_.signal(j, t);
            effective -= 0.5 * I * (b.adjoint() * b);
            jumps.noalias() += b * rho * b.adjoint();
            if (!ops_.offband[j].isZero(0.0)) {
                jumps.noalias() += ops_.offband[j] * rho * ops_.offband[j].adjoint();
            }
        }
        const Eigen::MatrixXcd er = effective * rho;
        d = -I * er + I * er.adjoint() + jumps;
    }

private:
    const CollapseOperators& ops_;
    int levels_;
    Eigen::MatrixXcd ring_;
    Eigen::MatrixXcd offband_rate_;
};

} // namespace

Eigen::MatrixXcd CollapseOperators::signal(int port, double t) const
{
    const Eigen::Index n = manifold.size();
    return emission[port] + displacement[port] * std::polar(1.0, -omega * t) * Eigen::MatrixXcd::Identity(n, n);
}

Eigen::MatrixXcd CollapseOperators::drive_hamiltonian(double t) const
{
    const Eigen::Index n = manifold.size();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    const cplx phase = std::polar(1.0, -omega * t);
    for (int j = 0; j < 3; ++j) {
        a += displacement[j] * phase * emission[j].adjoint();
    }
    return -0.5 * I * (a - a.adjoint());
}

Eigen::MatrixXcd CollapseOperators::rotating_drive_hamiltonian() const { return drive_hamiltonian(0.0); }

CollapseOperators collapse_ops(const RingEigensystem& ring, const DriveSpec& drive)
{
    if (!(drive.omega > 0.0)) {
        throw ConfigError("drive frequency must be positive");
    }
    const int levels = ring.levels();
    const Eigen::VectorXd e = ring.excitation_energies();

    CollapseOperators ops;
    ops.omega = drive.omega;
    ops.displacement = drive.alpha;
    ops.manifold.resize(levels);
    for (int m = 0; m < levels; ++m) {
        ops.manifold(m) = e(m) < 0.5 * drive.omega ? 0.0 : 1.0;
    }

    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd& lowering = ring.ports.lowering[j];
        ops.emission[j] = Eigen::MatrixXcd::Zero(levels, levels);
        ops.offband[j] = Eigen::MatrixXcd::Zero(levels, levels);
        for (int m = 0; m < levels; ++m) {
            for (int n = 0; n < levels; ++n) {
                const cplx v = lowering(m, n);
                if (v == 0.0) {
                    continue;
                }
                if (ops.manifold(m) == 0.0 && ops.manifold(n) == 1.0) {
                    ops.emission[j](m, n) = drive.g * v;
                } else {
                    const double gap = e(n) - e(m);
                    const double weight = std::abs(gap) < kDegeneracyTolerance ? 1.0 : std::sqrt(gap / drive.omega);
                    ops.offband[j](m, n) = drive.g * weight * v;
                }
            }
        }
    }
    return ops;
}

DensityMatrix ground_state(int levels)
{
    DensityMatrix rho = DensityMatrix::Zero(levels, levels);
    rho(0, 0) = 1.0;
    return rho;
}

OutputFluxes output_fluxes(const DensityMatrix& rho, const CollapseOperators& ops, double t)
{
    OutputFluxes out;
    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd b = ops.signal(j, t);
        out.beta[j] = (b * rho).trace();
        out.flux[j] = std::max(0.0, (b.adjoint() * b * rho).trace().real());
    }
    return out;
}

Eigen::MatrixXcd rotating_frame_liouvillian(const Eigen::VectorXd& energies, const CollapseOperators& ops)
{
    const int n = ops.levels();
    const Eigen::VectorXd detuned = energies.array() - energies(0) - ops.omega * ops.manifold.array();
    const Eigen::MatrixXcd h = Eigen::MatrixXcd(detuned.cast<cplx>().asDiagonal()) + ops.rotating_drive_hamiltonian();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);

    Eigen::MatrixXcd l = -I * (kron(id, h) - kron(h.transpose(), id));
    for (int j = 0; j < 3; ++j) {
        add_dissipator(l, ops.emission[j] + ops.displacement[j] * id);
        if (!ops.offband[j].isZero(0.0)) {
            add_dissipator(l, ops.offband[j]);
        }
    }
    return l;
}

SteadyStateResult steady_state_rotating_frame(const Eigen::VectorXd& energies, const CollapseOperators& ops)
{
    const int n = ops.levels();
    if (n > 8) {
        throw ConfigError("rotating-frame steady state supports at most 8 levels");
    }

    SteadyStateResult out;
    if (is_decoupled(ops)) {
        out.rho = ground_state(n);
        out.convergence = {"decoupled", 0, 0.0, true};
        fill_outputs(out, ops);
        return out;
    }

    const Eigen::MatrixXcd l = rotating_frame_liouvillian(energies, ops);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(l, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double threshold = 1e-12 * sv(0) * static_cast<double>(n * n);
    const int null_dim = static_cast<int>((sv.array() <= threshold).count());
    if (null_dim != 1) {
        throw DegeneracyError("rotating-frame Liouvillian null space has dimension " + std::to_string(null_dim),
                              null_dim);
    }

    const Eigen::VectorXcd v = svd.matrixV().col(n * n - 1);
    DensityMatrix rho = Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
    rho /= rho.trace();
    rho = (0.5 * (rho + rho.adjoint())).eval();

    const Eigen::VectorXcd vec_rho = Eigen::Map<const Eigen::VectorXcd>(rho.data(), n * n);
    out.rho = std::move(rho);
    out.convergence = {"rotating-frame", 1, (l * vec_rho).norm(), true};
    fill_outputs(out, ops);
    return out;
}

Trajectory evolve_time_domain(const DensityMatrix& rho0, const Eigen::VectorXd& energies,
                              const CollapseOperators& ops, double t0, double t1, double sample_dt,
                              const IntegratorOptions& options)
{
    const int n = ops.levels();
    if (rho0.rows() != n || rho0.cols() != n || energies.size() != n) {
        throw ConfigError("evolve_time_domain: dimension mismatch");
    }
    if (!(t1 > t0) || !(sample_dt > 0.0)) {
        throw ConfigError("evolve_time_domain: empty time span");
    }

    std::vector<double> times;
    const auto count = static_cast<long>(std::ceil((t1 - t0) / sample_dt - 1e-9));
    for (long k = 0; k <= count; ++k) {
        times.push_back(std::min(t1, t0 + static_cast<double>(k) * sample_dt));
    }

    auto trajectory = std::make_shared<Trajectory>();
    trajectory->min_eigenvalue = min_eigenvalue(rho0);
    State x(rho0.data(), rho0.data() + static_cast<std::ptrdiff_t>(n) * n);
    const MasterEquation rhs(energies, ops);

    auto observer = [&](const State& s, double t) {
        TrajectorySample sample;
        sample.t = t;
        sample.rho = Eigen::Map<const Eigen::MatrixXcd>(s.data(), n, n);
        const OutputFluxes f = output_fluxes(sample.rho, ops, t);
        sample.beta = f.beta;
        sample.flux = f.flux;
        sample.populations = sample.rho.diagonal().real();
        const double trace_error = std::abs(sample.rho.trace() - 1.0);
        trajectory->max_trace_error = std::max(trajectory->max_trace_error, trace_error);
        trajectory->min_eigenvalue = std::min(trajectory->min_eigenvalue, min_eigenvalue(sample.rho));
        trajectory->samples.push_back(std::move(sample));
        if (trace_error > options.trace_tol) {
            throw ConvergenceError("trace drifted by " + std::to_string(trace_error) + " at t=" + std::to_string(t),
                                   trajectory);
        }
    };

    try {
        auto stepper = odeint::make_dense_output(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
        trajectory->steps = static_cast<long>(odeint::integrate_times(
            stepper, std::cref(rhs), x, times.begin(), times.end(), options.initial_step, observer,
            odeint::max_step_checker(1000000)));
    } catch (const ConvergenceError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConvergenceError(std::string("step-size control failed (stiff system?): ") + e.what(), trajectory);
    }
    return std::move(*trajectory);
}

SteadyStateResult steady_state_time_domain(const Eigen::VectorXd& energies, const CollapseOperators& ops,
                                           const TimeDomainOptions& options)
{
    const int n = ops.levels();
    const double period = 2.0 * std::numbers::pi / ops.omega;
    const double sample_dt = period / options.samples_per_period;
    const double input = total_input(ops);

    auto history = std::make_shared<Trajectory>();
    DensityMatrix rho = ground_state(n);
    std::array<double, 3> previous{};
    bool have_previous = false;
    int stable = 0;
    double t = 0.0;
    double change = 0.0;
    long steps = 0;

    while (t < options.max_time) {
        Trajectory segment;
        try {
            segment = evolve_time_domain(rho, energies, ops, t, t + period, sample_dt, options.integrator);
        } catch (const ConvergenceError& e) {
            if (e.partial() != nullptr) {
                history->samples.insert(history->samples.end(), e.partial()->samples.begin(),
                                        e.partial()->samples.end());
            }
            throw ConvergenceError(e.what(), history);
        }
        steps += segment.steps;
        history->max_trace_error = std::max(history->max_trace_error, segment.max_trace_error);
        history->min_eigenvalue = std::min(history->min_eigenvalue, segment.min_eigenvalue);

        // Trapezoidal average over the drive period.
        std::array<double, 3> average{};
        const auto& s = segment.samples;
        for (std::size_t k = 1; k < s.size(); ++k) {
            const double w = (s[k].t - s[k - 1].t) / period;
            for (int j = 0; j < 3; ++j) {
                average[j] += 0.5 * w * (s[k].flux[j] + s[k - 1].flux[j]);
            }
        }
        rho = s.back().rho;
        t = s.back().t;
        history->samples.push_back(s.back());

        if (have_previous) {
            const double scale = std::max({input, average[0], average[1], average[2], 1e-300});
            change = 0.0;
            for (int j = 0; j < 3; ++j) {
                change = std::max(change, std::abs(average[j] - previous[j]) / scale);
            }
            stable = change < options.tol ? stable + 1 : 0;
        }
        previous = average;
        have_previous = true;

        if (stable >= options.stable_periods) {
            SteadyStateResult out;
            // Back to the rotating frame: rho~_mn = e^{i omega (P_m - P_n) t} rho_mn.
            out.rho = rho;
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    out.rho(a, b) *= std::polar(1.0, ops.omega * (ops.manifold(a) - ops.manifold(b)) * t);
                }
            }
            fill_outputs(out, ops);
            out.flux = average;
            out.convergence = {"time-domain", steps, change, true};
            history->steps = steps;
            return out;
        }
    }
    history->steps = steps;
    throw ConvergenceError("time-domain evolution did not reach a steady state within "
                               + std::to_string(options.max_time) + " ns (last relative change "
                               + std::to_string(change) + ")",
                           history);
}

} // namespace ringcirc
