#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ringcirc/circuit.hpp"
#include "ringcirc/dynamics.hpp"
#include "ringcirc/ring.hpp"

namespace ringcirc {

/// Input power per driven port, either in dBm or as a photon flux (photons/ns).
struct Power {
    enum class Unit { DBm, Flux };
    double value = -180.0;
    Unit unit = Unit::DBm;

    static Power dbm(double v) { return {v, Unit::DBm}; }
    static Power flux(double v) { return {v, Unit::Flux}; }

    double to_flux(double omega) const;
    double to_dbm(double omega) const;

    bool operator==(const Power&) const = default;
};

/// Linear-regime extraction power.
inline constexpr double kWeakDriveDbm = -180.0;

struct SolverOptions {
    Truncation truncation;
    DiagonalAssignment diagonal = DiagonalAssignment::Excluded;
    TimeDomainOptions time_domain;
    /// Skip the rotating-frame solve and integrate in the lab frame.
    bool force_time_domain = false;
    /// Worker threads for sweeps; 0 = hardware concurrency.
    int threads = 0;
};

struct SMatrixMeta {
    BiasPoint bias;
    double omega = 0.0;
    double power_dbm = 0.0;
    double input_flux = 0.0;
    double g = 0.0;
    std::string method;
    double residual = 0.0;
    bool converged = true;
};

/// Photon-flux scattering matrix, s[i][j] = B_i / |alpha_j|^2 (0-based ports).
struct SMatrix {
    std::array<std::array<double, 3>, 3> s{};
    SMatrixMeta meta;

    double operator()(int i, int j) const { return s[i][j]; }
    double column_sum(int j) const { return s[0][j] + s[1][j] + s[2][j]; }
    Eigen::Matrix3d matrix() const;
};

/// Non-convergence while solving one column of the S-matrix.
class ColumnConvergenceError : public ConvergenceError {
public:
    ColumnConvergenceError(int column, const std::string& what)
        : ConvergenceError("column " + std::to_string(column + 1) + ": " + what), column_(column) {}
    int column() const noexcept { return column_; }

private:
    int column_;
};

/// Steady state of the ring driven through `port` only: rotating frame, falling back to
/// time-domain integration when the Liouvillian null space is degenerate.
SteadyStateResult driven_steady_state(const RingEigensystem& ring, double g, double omega, double flux, int port,
                                      const SolverOptions& options);

/// Column `port` of the S-matrix for an already solved ring.
std::array<double, 3> s_column(const RingEigensystem& ring, double g, double omega, double flux, int port,
                               const SolverOptions& options, Convergence* info = nullptr);

SMatrix s_matrix(const RingEigensystem& ring, double g, double omega, double flux, const SolverOptions& options = {});

SMatrix s_matrix(const PhysicalSpec& spec, const BiasPoint& bias, double omega, Power power = {},
                 const SolverOptions& options = {});

struct Axis {
    std::string name;
    std::string unit;
    std::vector<double> grid;
};

struct SweepPoint {
    std::array<double, 2> coords{};
    SMatrix s;
    bool converged = true;
    std::string error;
    /// E_m - E_0 of the ring at this point.
    Eigen::VectorXd eigenfrequencies;
};

struct SweepResult {
    std::vector<Axis> axes;
    std::vector<SweepPoint> points; ///< row-major over axes[0] x axes[1]
    std::map<std::string, double> scalars;
};

/// Applies `fn(i)` for i in [0, n) on up to `threads` workers; results keep index order.
template <class F>
auto parallel_map(std::size_t n, int threads, F&& fn) -> std::vector<decltype(fn(std::size_t{}))>
{
    using T = decltype(fn(std::size_t{}));
    std::vector<std::optional<T>> slots(n);
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(n, 1));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

/// S-matrix over a frequency grid (rad/ns) at fixed bias.
SweepResult frequency_sweep(const PhysicalSpec& spec, const BiasPoint& bias, const std::vector<double>& omegas,
                            Power power = {}, const SolverOptions& options = {});

/// Width (rad/ns) of the contiguous band around `center` where 1 - S31 <= 0.1, S11 <= 0.1 and S21 <= 0.1.
/// Zero if the grid point nearest to `center` is outside the band.
double bandwidth(const SweepResult& sweep, double center);

/// S-matrix over input powers (dBm) at fixed bias and frequency; needs at least 40 dB of range.
SweepResult power_sweep(const PhysicalSpec& spec, const BiasPoint& bias, double omega,
                        const std::vector<double>& powers_dbm, const SolverOptions& options = {});

/// Lowest power (dBm) where S31 is 1 dB below its value at the lowest swept power,
/// interpolated linearly in dB. NaN if S31 never compresses by 1 dB.
double compression_point(const SweepResult& power_sweep);

/// S-matrix over the central bias X.
SweepResult central_bias_sweep(const PhysicalSpec& spec, const std::array<double, 3>& segment, double omega,
                               const std::vector<double>& xs, Power power = {}, const SolverOptions& options = {});

/// 2D map over offsets of two segment biases (`nodes`, 0-based) around `bias`.
SweepResult segment_bias_map(const PhysicalSpec& spec, const BiasPoint& bias, double omega,
                             const std::vector<double>& offsets_a, const std::vector<double>& offsets_b,
                             std::array<int, 2> nodes = {0, 1}, Power power = {}, const SolverOptions& options = {});

/// Evenly spaced grid from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);
/// Grid lo, lo + step, ... up to hi (inclusive within rounding).
std::vector<double> arange(double lo, double hi, double step);

} // namespace ringcirc
