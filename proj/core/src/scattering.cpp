#include "ringcirc/scattering.hpp"

#include <cmath>
#include <limits>

#include "ringcirc/units.hpp"

namespace ringcirc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_monotone(const std::vector<double>& grid, const char* what)
{
    if (grid.empty()) {
        throw ConfigError(std::string(what) + " grid is empty");
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) {
            throw ConfigError(std::string(what) + " grid must be strictly increasing");
        }
    }
}

SweepPoint failed_point(std::array<double, 2> coords, const std::string& what)
{
    SweepPoint p;
    p.coords = coords;
    p.converged = false;
    p.error = what;
    for (auto& row : p.s.s) {
        row.fill(kNaN);
    }
    p.s.meta.converged = false;
    return p;
}

SweepPoint point_at(const PhysicalSpec& spec, const RingSpec& ring, BiasPoint bias, double omega, Power power,
                    const SolverOptions& options, std::array<double, 2> coords)
{
    bias.n0.reset();
    try {
        const RingEigensystem sys = solve_ring(ring, bias, options.truncation, options.diagonal);
        const double g = coupling_strength(spec, omega);
        SweepPoint p;
        p.coords = coords;
        p.s = s_matrix(sys, g, omega, power.to_flux(omega), options);
        p.converged = p.s.meta.converged;
        p.eigenfrequencies = sys.excitation_energies();
        return p;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        return failed_point(coords, e.what());
    }
}

} // namespace

double Power::to_flux(double omega) const
{
    return unit == Unit::Flux ? value : units::dbm_to_flux(value, omega);
}

double Power::to_dbm(double omega) const
{
    return unit == Unit::DBm ? value : units::flux_to_dbm(value, omega);
}

Eigen::Matrix3d SMatrix::matrix() const
{
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            m(i, j) = s[i][j];
        }
    }
    return m;
}

SteadyStateResult driven_steady_state(const RingEigensystem& ring, double g, double omega, double flux, int port,
                                      const SolverOptions& options)
{
    if (port < 0 || port > 2) {
        throw ConfigError("port index must be 0, 1 or 2");
    }
    if (!(flux > 0.0)) {
        throw ConfigError("input flux must be positive");
    }
    DriveSpec drive;
    drive.omega = omega;
    drive.g = g;
    drive.alpha[port] = std::sqrt(flux);
    const CollapseOperators ops = collapse_ops(ring, drive);

    if (!options.force_time_domain) {
        try {
            return steady_state_rotating_frame(ring.energies, ops);
        } catch (const DegeneracyError&) {
            SteadyStateResult st = steady_state_time_domain(ring.energies, ops, options.time_domain);
            st.convergence.method = "time-domain-fallback";
            return st;
        }
    }
    return steady_state_time_domain(ring.energies, ops, options.time_domain);
}

std::array<double, 3> s_column(const RingEigensystem& ring, double g, double omega, double flux, int port,
                               const SolverOptions& options, Convergence* info)
{
    SteadyStateResult st;
    try {
        st = driven_steady_state(ring, g, omega, flux, port, options);
    } catch (const ColumnConvergenceError&) {
        throw;
    } catch (const ConvergenceError& e) {
        throw ColumnConvergenceError(port, e.what());
    }
    if (info != nullptr) {
        *info = st.convergence;
    }
    std::array<double, 3> column{};
    if (g == 0.0) {
        // Uncoupled ring: total reflection, without the rounding of |sqrt(flux)|^2 / flux.
        column[port] = 1.0;
        return column;
    }
    for (int i = 0; i < 3; ++i) {
        column[i] = st.flux[i] / flux;
    }
    return column;
}

SMatrix s_matrix(const RingEigensystem& ring, double g, double omega, double flux, const SolverOptions& options)
{
    SMatrix out;
    out.meta.bias = ring.bias;
    out.meta.omega = omega;
    out.meta.input_flux = flux;
    out.meta.power_dbm = units::flux_to_dbm(flux, omega);
    out.meta.g = g;
    std::vector<std::string> methods;
    for (int j = 0; j < 3; ++j) {
        Convergence info;
        const auto column = s_column(ring, g, omega, flux, j, options, &info);
        for (int i = 0; i < 3; ++i) {
            out.s[i][j] = column[i];
        }
        out.meta.residual = std::max(out.meta.residual, info.residual);
        out.meta.converged = out.meta.converged && info.converged;
        if (std::find(methods.begin(), methods.end(), info.method) == methods.end()) {
            methods.push_back(info.method);
        }
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
        out.meta.method += (k ? "+" : "") + methods[k];
    }
    return out;
}

SMatrix s_matrix(const PhysicalSpec& spec, const BiasPoint& bias, double omega, Power power,
                 const SolverOptions& options)
{
    if (!(omega >= 1.0 && omega <= 30.0)) {
        throw ConfigError("drive frequency must lie within [1, 30] rad/ns");
    }
    const RingSpec ring = dual_map(spec);
    const RingEigensystem sys = solve_ring(ring, bias, options.truncation, options.diagonal);
    SMatrix out = s_matrix(sys, coupling_strength(spec, omega), omega, power.to_flux(omega), options);
    if (power.unit == Power::Unit::DBm) {
        out.meta.power_dbm = power.value;
    }
    return out;
}

SweepResult frequency_sweep(const PhysicalSpec& spec, const BiasPoint& bias, const std::vector<double>& omegas,
                            Power power, const SolverOptions& options)
{
    require_monotone(omegas, "frequency");
    if (omegas.front() < 1.0 || omegas.back() > 30.0) {
        throw ConfigError("frequency grid must lie within [1, 30] rad/ns");
    }
    const RingSpec ring = dual_map(spec);
    const RingEigensystem sys = solve_ring(ring, bias, options.truncation, options.diagonal);

    SweepResult out;
    out.axes.push_back({"omega", "rad/ns", omegas});
    out.points = parallel_map(omegas.size(), options.threads, [&](std::size_t k) {
        const double omega = omegas[k];
        try {
            SweepPoint p;
            p.coords = {omega, 0.0};
            p.s = s_matrix(sys, coupling_strength(spec, omega), omega, power.to_flux(omega), options);
            p.converged = p.s.meta.converged;
            p.eigenfrequencies = sys.excitation_energies();
            return p;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            return failed_point({omega, 0.0}, e.what());
        }
    });
    return out;
}

double bandwidth(const SweepResult& sweep, double center)
{
    const auto& pts = sweep.points;
    if (pts.empty()) {
        return 0.0;
    }
    auto in_band = [&](std::size_t k) {
        const SMatrix& s = pts[k].s;
        return pts[k].converged && 1.0 - s(2, 0) <= 0.1 && s(0, 0) <= 0.1 && s(1, 0) <= 0.1;
    };
    std::size_t mid = 0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        if (std::abs(pts[k].coords[0] - center) < std::abs(pts[mid].coords[0] - center)) {
            mid = k;
        }
    }
    if (!in_band(mid)) {
        return 0.0;
    }
    std::size_t lo = mid;
    std::size_t hi = mid;
    while (lo > 0 && in_band(lo - 1)) {
        --lo;
    }
    while (hi + 1 < pts.size() && in_band(hi + 1)) {
        ++hi;
    }
    return pts[hi].coords[0] - pts[lo].coords[0];
}

SweepResult power_sweep(const PhysicalSpec& spec, const BiasPoint& bias, double omega,
                        const std::vector<double>& powers_dbm, const SolverOptions& options)
{
    require_monotone(powers_dbm, "power");
    if (powers_dbm.back() - powers_dbm.front() < 40.0) {
        throw ConfigError("power sweep must cover at least four decades (40 dB)");
    }
    const RingSpec ring = dual_map(spec);
    const RingEigensystem sys = solve_ring(ring, bias, options.truncation, options.diagonal);
    const double g = coupling_strength(spec, omega);

    SweepResult out;
    out.axes.push_back({"power", "dBm", powers_dbm});
    out.points = parallel_map(powers_dbm.size(), options.threads, [&](std::size_t k) {
        const double dbm = powers_dbm[k];
        try {
            SweepPoint p;
            p.coords = {dbm, 0.0};
            p.s = s_matrix(sys, g, omega, units::dbm_to_flux(dbm, omega), options);
            p.s.meta.power_dbm = dbm;
            p.converged = p.s.meta.converged;
            p.eigenfrequencies = sys.excitation_energies();
            return p;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            return failed_point({dbm, 0.0}, e.what());
        }
    });
    const double c = compression_point(out);
    if (!std::isnan(c)) {
        out.scalars["compression_dbm"] = c;
        out.scalars["compression_photons_per_s"] = units::flux_per_second(units::dbm_to_flux(c, omega));
    }
    return out;
}

double compression_point(const SweepResult& sweep)
{
    const auto& pts = sweep.points;
    if (pts.empty() || !pts.front().converged) {
        return kNaN;
    }
    const double reference = units::to_db(pts.front().s(2, 0));
    double prev_p = pts.front().coords[0];
    double prev_drop = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        if (!pts[k].converged) {
            continue;
        }
        const double p = pts[k].coords[0];
        const double drop = reference - units::to_db(pts[k].s(2, 0));
        if (drop >= 1.0) {
            return prev_p + (1.0 - prev_drop) / (drop - prev_drop) * (p - prev_p);
        }
        prev_p = p;
        prev_drop = drop;
    }
    return kNaN;
}

SweepResult central_bias_sweep(const PhysicalSpec& spec, const std::array<double, 3>& segment, double omega,
                               const std::vector<double>& xs, Power power, const SolverOptions& options)
{
    require_monotone(xs, "central bias");
    const RingSpec ring = dual_map(spec);
    SweepResult out;
    out.axes.push_back({"x", "", xs});
    out.points = parallel_map(xs.size(), options.threads, [&](std::size_t k) {
        BiasPoint bias;
        bias.x = xs[k];
        bias.segment = segment;
        return point_at(spec, ring, bias, omega, power, options, {xs[k], 0.0});
    });
    return out;
}

SweepResult segment_bias_map(const PhysicalSpec& spec, const BiasPoint& bias, double omega,
                             const std::vector<double>& offsets_a, const std::vector<double>& offsets_b,
                             std::array<int, 2> nodes, Power power, const SolverOptions& options)
{
    require_monotone(offsets_a, "segment offset");
    require_monotone(offsets_b, "segment offset");
    for (int n : nodes) {
        if (n < 0 || n > 2) {
            throw ConfigError("segment node index must be 0, 1 or 2");
        }
    }
    if (nodes[0] == nodes[1]) {
        throw ConfigError("segment map needs two distinct nodes");
    }
    const RingSpec ring = dual_map(spec);
    SweepResult out;
    out.axes.push_back({"dN" + std::to_string(nodes[0] + 1), "", offsets_a});
    out.axes.push_back({"dN" + std::to_string(nodes[1] + 1), "", offsets_b});
    const std::size_t nb = offsets_b.size();
    out.points = parallel_map(offsets_a.size() * nb, options.threads, [&](std::size_t k) {
        const double da = offsets_a[k / nb];
        const double db = offsets_b[k % nb];
        BiasPoint b = bias;
        b.segment[nodes[0]] += da;
        b.segment[nodes[1]] += db;
        return point_at(spec, ring, b, omega, power, options, {da, db});
    });
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    if (n == 0) {
        return {};
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    return out;
}

std::vector<double> arange(double lo, double hi, double step)
{
    if (!(step > 0.0) || hi < lo) {
        throw ConfigError("arange: invalid range");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo + step * static_cast<double>(k);
    }
    return out;
}

} // namespace ringcirc
