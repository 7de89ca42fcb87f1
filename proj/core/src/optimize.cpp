#include "ringcirc/optimize.hpp"

#include <cmath>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace ringcirc {

namespace {

struct Region {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double omega_lo = 1.0;
    double omega_hi = 30.0;
    std::array<double, 3> segment{};
    double segment_span = std::numeric_limits<double>::infinity();

    bool contains(double x, const std::array<double, 3>& n, double omega) const
    {
        if (x < x_lo || x > x_hi || omega < omega_lo || omega > omega_hi) {
            return false;
        }
        for (int k = 0; k < 3; ++k) {
            if (std::abs(n[k] - segment[k]) > segment_span) {
                return false;
            }
        }
        return true;
    }
};

struct Objective {
    const PhysicalSpec& spec;
    const RingSpec ring;
    const OptimizerOptions& options;
    std::vector<OptimizerStep>* trace = nullptr;
    int evaluations = 0;
    Region region;

    int port() const { return options.direction == Direction::Clockwise ? 0 : 2; }
    int target() const { return options.direction == Direction::Clockwise ? 2 : 0; }

    /// Forward transmission, or 0 where the model cannot be solved.
    double transmission(const RingEigensystem& sys, double omega) const
    {
        try {
            const double g = coupling_strength(spec, omega);
            const auto col = s_column(sys, g, omega, options.power.to_flux(omega), port(), options.solver);
            return col[target()];
        } catch (const ConfigError&) {
            throw;
        } catch (const Error&) {
            return 0.0;
        }
    }

    double operator()(double x, const std::array<double, 3>& segment, double omega)
    {
        ++evaluations;
        double value = 0.0;
        if (x > 0.0 && x < 1.0 && omega >= 1.0 && omega <= 30.0 && region.contains(x, segment, omega)) {
            try {
                BiasPoint bias;
                bias.x = x;
                bias.segment = segment;
                const RingEigensystem sys = solve_ring(ring, bias, options.solver.truncation, options.solver.diagonal);
                value = transmission(sys, omega);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error&) {
                value = 0.0;
            }
        }
        if (trace != nullptr) {
            trace->push_back({x, segment, omega, value});
        }
        return value;
    }
};

struct SimplexContext {
    Objective* objective;
    const OptimizerOptions* options;
    std::array<double, 3> base_segment;
    bool segments;
};

void unpack(const SimplexContext& c, const gsl_vector* v, double& x, std::array<double, 3>& segment, double& omega)
{
    const double sx = c.options->x_tol;
    const double sw = c.options->omega_tol;
    x = gsl_vector_get(v, 0) * sx;
    segment = c.base_segment;
    if (c.segments) {
        segment[0] = gsl_vector_get(v, 1) * sx;
        segment[1] = gsl_vector_get(v, 2) * sx;
        omega = gsl_vector_get(v, 3) * sw;
    } else {
        omega = gsl_vector_get(v, 1) * sw;
    }
}

double simplex_cost(const gsl_vector* v, void* params)
{
    auto& c = *static_cast<SimplexContext*>(params);
    double x = 0.0;
    double omega = 0.0;
    std::array<double, 3> segment{};
    unpack(c, v, x, segment, omega);
    return -(*c.objective)(x, segment, omega);
}

} // namespace

OptimizationResult optimize_bias(const PhysicalSpec& spec, double omega_hint, const OptimizerOptions& options)
{
    if (!(options.x_step > 0.0) || !(options.omega_step > 0.0) || options.x_max < options.x_min
        || options.omega_span < 0.0) {
        throw ConfigError("optimizer grid is empty");
    }
    if (!(options.x_tol > 0.0) || !(options.omega_tol > 0.0) || !(options.segment_span >= 0.0)) {
        throw ConfigError("optimizer tolerances must be positive");
    }

    gsl_set_error_handler_off();

    OptimizationResult out;
    Objective objective{spec, dual_map(spec), options, nullptr, 0, {}};

    // Coarse grid, one ring solve per X.
    std::vector<double> xs = arange(options.x_min, options.x_max, options.x_step);
    if (options.direction == Direction::CounterClockwise) {
        for (double& x : xs) {
            x = 1.0 - x;
        }
        std::reverse(xs.begin(), xs.end());
    }
    std::vector<double> omegas;
    for (double w : arange(omega_hint - options.omega_span, omega_hint + options.omega_span, options.omega_step)) {
        if (w >= 1.0 && w <= 30.0) {
            omegas.push_back(w);
        }
    }
    if (omegas.empty()) {
        throw ConfigError("optimizer frequency grid lies outside [1, 30] rad/ns");
    }

    const auto rows = parallel_map(xs.size(), options.solver.threads, [&](std::size_t k) {
        std::vector<double> row(omegas.size(), 0.0);
        try {
            BiasPoint bias;
            bias.x = xs[k];
            bias.segment = options.segment;
            const RingEigensystem sys =
                solve_ring(objective.ring, bias, options.solver.truncation, options.solver.diagonal);
            for (std::size_t w = 0; w < omegas.size(); ++w) {
                row[w] = objective.transmission(sys, omegas[w]);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error&) {
        }
        return row;
    });

    double best = -1.0;
    double best_x = xs.front();
    double best_omega = omegas.front();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        for (std::size_t w = 0; w < omegas.size(); ++w) {
            out.trace.push_back({xs[k], options.segment, omegas[w], rows[k][w]});
            if (rows[k][w] > best) {
                best = rows[k][w];
                best_x = xs[k];
                best_omega = omegas[w];
            }
        }
    }
    out.evaluations = static_cast<int>(xs.size() * omegas.size());

    // Nelder-Mead refinement in variables scaled by the stopping tolerances, kept near the grid optimum.
    objective.region.x_lo = best_x - options.x_step;
    objective.region.x_hi = best_x + options.x_step;
    objective.region.omega_lo = omegas.front();
    objective.region.omega_hi = omegas.back();
    objective.region.segment = options.segment;
    objective.region.segment_span = options.segment_span;
    const std::size_t dim = options.optimize_segments ? 4 : 2;
    SimplexContext ctx{&objective, &options, options.segment, options.optimize_segments};
    objective.trace = &out.trace;

    gsl_vector* start = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    gsl_vector_set(start, 0, best_x / options.x_tol);
    gsl_vector_set(step, 0, 0.5 * options.x_step / options.x_tol);
    if (options.optimize_segments) {
        gsl_vector_set(start, 1, options.segment[0] / options.x_tol);
        gsl_vector_set(start, 2, options.segment[1] / options.x_tol);
        gsl_vector_set(step, 1, 0.01 / options.x_tol);
        gsl_vector_set(step, 2, 0.01 / options.x_tol);
    }
    gsl_vector_set(start, dim - 1, best_omega / options.omega_tol);
    gsl_vector_set(step, dim - 1, 0.5 * options.omega_step / options.omega_tol);

    gsl_multimin_function fn{&simplex_cost, dim, &ctx};
    gsl_multimin_fminimizer* minimizer = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(minimizer, &fn, start, step);

    int status = GSL_CONTINUE;
    for (int iter = 0; iter < options.max_iterations && status == GSL_CONTINUE; ++iter) {
        if (gsl_multimin_fminimizer_iterate(minimizer) != GSL_SUCCESS) {
            break;
        }
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer), 1.0);
    }
    out.converged = status == GSL_SUCCESS;

    double x = 0.0;
    double omega = 0.0;
    std::array<double, 3> segment{};
    unpack(ctx, gsl_multimin_fminimizer_x(minimizer), x, segment, omega);
    const double refined = -gsl_multimin_fminimizer_minimum(minimizer);
    gsl_multimin_fminimizer_free(minimizer);
    gsl_vector_free(start);
    gsl_vector_free(step);
    out.evaluations += objective.evaluations;

    if (refined < best) {
        x = best_x;
        omega = best_omega;
        segment = options.segment;
    }

    out.bias.x = x;
    out.bias.segment = segment;
    out.omega = omega;
    try {
        out.s = s_matrix(spec, out.bias, omega, options.power, options.solver);
        out.bias = out.s.meta.bias;
        out.achieved = options.direction == Direction::Clockwise ? out.s(2, 0) : out.s(0, 2);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        out.achieved = 0.0;
        out.flag = e.what();
    }
    if (out.achieved < 0.5) {
        out.no_basin = true;
        out.flag = "no circulation basin found";
    }
    return out;
}

std::string_view to_string(DisorderAxes axes)
{
    switch (axes) {
    case DisorderAxes::TunnelEnergy:
        return "tunnel-energy";
    case DisorderAxes::ParasiticMass:
        return "parasitic-mass";
    case DisorderAxes::JunctionMass:
        return "junction-mass";
    }
    return "?";
}

DisorderAxes disorder_axes_from_string(std::string_view name)
{
    if (name == "tunnel-energy" || name == "E_T") {
        return DisorderAxes::TunnelEnergy;
    }
    if (name == "parasitic-mass" || name == "L_g" || name == "C_g") {
        return DisorderAxes::ParasiticMass;
    }
    if (name == "junction-mass" || name == "L_s" || name == "C_J") {
        return DisorderAxes::JunctionMass;
    }
    throw ConfigError("unknown disorder axes '" + std::string(name) + "'");
}

PhysicalSpec perturb(const PhysicalSpec& spec, DisorderAxes axes, std::array<int, 2> elements, double da, double db)
{
    if (elements[0] == elements[1]) {
        throw ConfigError("disorder study needs two distinct elements");
    }
    switch (axes) {
    case DisorderAxes::TunnelEnergy:
        return with_tunnel_energy(with_tunnel_energy(spec, elements[0], da), elements[1], db);
    case DisorderAxes::ParasiticMass:
        return with_parasitic_mass(with_parasitic_mass(spec, elements[0], da), elements[1], db);
    case DisorderAxes::JunctionMass:
        return with_junction_mass(with_junction_mass(spec, elements[0], da), elements[1], db);
    }
    return spec;
}

DisorderStudy disorder_study(const PhysicalSpec& spec, const DisorderOptions& options)
{
    if (options.grid_a.empty() || options.grid_b.empty()) {
        throw ConfigError("disorder grid is empty");
    }
    DisorderStudy out;
    out.reference = optimize_bias(spec, options.omega_hint, options.optimizer);

    // Realizations run one per worker, each optimizer single-threaded.
    OptimizerOptions local = options.optimizer;
    const int threads = local.solver.threads;
    local.solver.threads = 1;

    const std::size_t nb = options.grid_b.size();
    out.realizations = parallel_map(options.grid_a.size() * nb, threads, [&](std::size_t k) {
        DisorderRealization r;
        r.delta_a = options.grid_a[k / nb];
        r.delta_b = options.grid_b[k % nb];
        r.spec = perturb(spec, options.axes, options.elements, r.delta_a, r.delta_b);
        r.optimum = optimize_bias(r.spec, options.omega_hint, local);
        return r;
    });
    return out;
}

} // namespace ringcirc
