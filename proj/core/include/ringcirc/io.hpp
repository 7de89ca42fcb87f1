#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringcirc/optimize.hpp"

namespace ringcirc {

enum class Command { Spectrum, SMatrix, SweepFrequency, SweepPower, SweepBias, MapSegmentBias, Optimize, Disorder };
enum class OutputFormat { Csv, Json, Both };

std::string_view to_string(Command c);
Command command_from_string(std::string_view name);
std::string_view to_string(OutputFormat f);
OutputFormat format_from_string(std::string_view name);

/// Inclusive grid lo, lo + step, ..., hi.
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
    bool operator==(const GridSpec&) const = default;
};

struct RunConfig {
    Command command = Command::SMatrix;
    std::optional<std::string> preset;
    PhysicalSpec spec;
    BiasPoint bias;
    double omega = 12.293;
    Power power = Power::dbm(kWeakDriveDbm);

    GridSpec omega_grid{-0.5, 0.5, 0.005};   ///< detuning from omega, rad/ns
    GridSpec power_grid{-190.0, -110.0, 1.0}; ///< dBm
    GridSpec x_grid{0.30, 0.44, 0.002};
    GridSpec segment_grid{-0.02, 0.02, 0.005};
    std::array<int, 2> segment_nodes{0, 1};

    DisorderAxes disorder_axes = DisorderAxes::TunnelEnergy;
    std::array<int, 2> disorder_elements{0, 1};
    GridSpec disorder_grid{-0.01, 0.01, 0.01};

    Direction direction = Direction::Clockwise;
    bool optimize_segments = true;

    Truncation truncation;
    DiagonalAssignment diagonal = DiagonalAssignment::Excluded;
    double tol = 1e-6;

    std::string output_dir = ".";
    OutputFormat format = OutputFormat::Both;
    int threads = 0;
    unsigned seed = 0;

    bool operator==(const RunConfig&) const = default;

    SolverOptions solver_options() const;
    OptimizerOptions optimizer_options() const;
};

/// Parses a JSON config document; `overrides` are "dotted.key=value" assignments applied on top
/// (values are read as JSON, falling back to a plain string). Unknown keys are errors.
RunConfig parse_config(std::string_view document, const std::vector<std::string>& overrides = {});

/// Reads and parses a config file. An empty file is treated as an empty document.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Fully explicit JSON form of a config; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kSchemaVersion = 1;

/// Fixed CSV header of sweep artifacts.
inline constexpr std::string_view kCsvHeader = "axis1,axis2,s11,s12,s13,s21,s22,s23,s31,s32,s33,converged,residual";

/// One CSV row per sweep point, 17 significant digits.
std::string sweep_csv(const SweepResult& sweep);

/// Executes the command, writes artifacts to config.output_dir and a summary to `out`.
/// Returns kExitOk, kExitNonConvergence or kExitConfigError.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace ringcirc
