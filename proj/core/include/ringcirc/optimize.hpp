#pragma once

#include <array>
#include <string>
#include <vector>

#include "ringcirc/scattering.hpp"

namespace ringcirc {

enum class Direction {
    Clockwise,        ///< maximise S31 (1 -> 3), searched over X < 0.5
    CounterClockwise, ///< maximise S13 (3 -> 1), searched over X > 0.5
};

struct OptimizerOptions {
    Direction direction = Direction::Clockwise;
    /// Coarse grid over X (mirrored to 1 - X for counter-clockwise) and omega around the hint.
    double x_min = 0.02;
    double x_max = 0.48;
    double x_step = 0.02;
    double omega_span = 1.0;
    double omega_step = 0.1;
    /// Also optimise the segment biases N1, N2 (N3 stays put; a common shift only relabels N0).
    bool optimize_segments = true;
    std::array<double, 3> segment{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    /// The refinement stays within one grid step of the best grid point in X, inside the
    /// frequency window, and within this distance of `segment` in N1, N2 (one period by default).
    double segment_span = 0.5;
    /// Simplex stops when its size falls below these (X and N in units of 1, omega in rad/ns).
    double x_tol = 1e-4;
    double omega_tol = 1e-3;
    int max_iterations = 600;
    unsigned seed = 0;
    Power power = Power::dbm(kWeakDriveDbm);
    SolverOptions solver;
};

struct OptimizerStep {
    double x = 0.0;
    std::array<double, 3> segment{};
    double omega = 0.0;
    double objective = 0.0;
};

struct OptimizationResult {
    BiasPoint bias;
    double omega = 0.0;
    SMatrix s;
    /// S31 (clockwise) or S13 (counter-clockwise) at the optimum.
    double achieved = 0.0;
    bool no_basin = false;
    std::string flag;
    std::vector<OptimizerStep> trace;
    int evaluations = 0;
    bool converged = false;
};

/// Grid search followed by Nelder-Mead refinement of the forward transmission.
OptimizationResult optimize_bias(const PhysicalSpec& spec, double omega_hint, const OptimizerOptions& options = {});

enum class DisorderAxes {
    TunnelEnergy,  ///< E_T of two junctions
    ParasiticMass, ///< L_g (C_g) of two nodes
    JunctionMass,  ///< L_s (C_J) of two junctions
};

std::string_view to_string(DisorderAxes axes);
DisorderAxes disorder_axes_from_string(std::string_view name);

PhysicalSpec perturb(const PhysicalSpec& spec, DisorderAxes axes, std::array<int, 2> elements, double da, double db);

struct DisorderOptions {
    DisorderAxes axes = DisorderAxes::TunnelEnergy;
    std::array<int, 2> elements{0, 1};
    std::vector<double> grid_a; ///< relative perturbations of element a
    std::vector<double> grid_b;
    double omega_hint = 12.293;
    OptimizerOptions optimizer;
};

struct DisorderRealization {
    double delta_a = 0.0;
    double delta_b = 0.0;
    PhysicalSpec spec;
    OptimizationResult optimum;
};

struct DisorderStudy {
    OptimizationResult reference; ///< unperturbed optimum
    std::vector<DisorderRealization> realizations; ///< row-major over grid_a x grid_b
};

/// Runs optimize_bias with the same options on the unperturbed ring and on every perturbed ring.
DisorderStudy disorder_study(const PhysicalSpec& spec, const DisorderOptions& options);

} // namespace ringcirc
