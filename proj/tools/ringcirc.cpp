#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ringcirc/io.hpp"

namespace {

template <class T>
std::string json_value(const T& v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string json_string(const std::string& s) { return "\"" + s + "\""; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Three-port superconducting ring circulator simulator"};
    app.set_version_flag("--version", "ringcirc 0.1.0");

    std::optional<std::string> config_path;
    std::optional<std::string> command, preset_name, format, direction, diagonal, output_dir;
    std::optional<double> x, omega, power_dbm, power_flux, g, line_param, tol;
    std::optional<int> n0, n_max, levels, threads;
    std::optional<unsigned> seed;
    std::vector<double> segment;
    bool fixed_segments = false;
    std::vector<std::string> assignments;

    app.add_option("-c,--config", config_path, "JSON config file")->envname("RINGCIRC_CONFIG");
    app.add_option("--command", command,
                   "spectrum | smatrix | sweep-frequency | sweep-power | sweep-bias | map-segment-bias | optimize | disorder")
        ->envname("RINGCIRC_COMMAND");
    app.add_option("--preset", preset_name, "tableS1-qps | tableS1-jj")->envname("RINGCIRC_PRESET");
    app.add_option("--x", x, "central bias X")->envname("RINGCIRC_X");
    app.add_option("--segment", segment, "segment biases N1 N2 N3")->expected(3)->envname("RINGCIRC_SEGMENT");
    app.add_option("--n0", n0, "expected conserved number N0 (checked)")->envname("RINGCIRC_N0");
    app.add_option("--omega", omega, "signal frequency, rad/ns (optimizer hint for optimize/disorder)")
        ->envname("RINGCIRC_OMEGA");
    auto* dbm = app.add_option("--power-dbm", power_dbm, "input power per port, dBm")->envname("RINGCIRC_POWER_DBM");
    app.add_option("--power-flux", power_flux, "input flux per port, photons/ns")
        ->envname("RINGCIRC_POWER_FLUX")
        ->excludes(dbm);
    auto* gopt = app.add_option("--g", g, "waveguide coupling at the reference frequency, rad/ns")
                     ->envname("RINGCIRC_G");
    app.add_option("--line-param", line_param, "transmission line L_r (nH) or C_r (fF)")
        ->envname("RINGCIRC_LINE_PARAM")
        ->excludes(gopt);
    app.add_option("--direction", direction, "clockwise | counter-clockwise")->envname("RINGCIRC_DIRECTION");
    app.add_flag("--fixed-segments", fixed_segments, "optimize X and omega only")->envname("RINGCIRC_FIXED_SEGMENTS");
    app.add_option("-o,--output-dir", output_dir, "artifact directory")->envname("RINGCIRC_OUTPUT_DIR");
    app.add_option("--format", format, "csv | json | both")->envname("RINGCIRC_FORMAT");
    app.add_option("--l-trunc", levels, "retained ring levels")->envname("RINGCIRC_L_TRUNC");
    app.add_option("--n-max", n_max, "number-basis cutoff")->envname("RINGCIRC_N_MAX");
    app.add_option("--tol", tol, "time-domain steady-state tolerance")->envname("RINGCIRC_TOL");
    app.add_option("--diagonal", diagonal, "excluded | lowering")->envname("RINGCIRC_DIAGONAL");
    app.add_option("-j,--threads", threads, "worker threads (0 = all cores)")->envname("RINGCIRC_THREADS");
    app.add_option("--seed", seed, "optimizer seed")->envname("RINGCIRC_SEED");
    app.add_option("--set", assignments, "raw config override key.path=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ringcirc::kExitConfigError;
    }

    std::vector<std::string> overrides;
    auto set = [&](const std::string& key, const std::string& value) { overrides.push_back(key + "=" + value); };
    if (command) set("command", json_string(*command));
    if (preset_name) set("preset", json_string(*preset_name));
    if (x) set("bias.x", json_value(*x));
    if (!segment.empty()) {
        set("bias.segment",
            "[" + json_value(segment[0]) + "," + json_value(segment[1]) + "," + json_value(segment[2]) + "]");
    }
    if (n0) set("bias.n0", json_value(*n0));
    if (omega) set("drive.omega", json_value(*omega));
    if (power_dbm) set("drive.power_dbm", json_value(*power_dbm));
    if (power_flux) set("drive.power_flux", json_value(*power_flux));
    if (g) set("circuit.g", json_value(*g));
    if (line_param) set("circuit.line_param", json_value(*line_param));
    if (direction) set("optimizer.direction", json_string(*direction));
    if (fixed_segments) set("optimizer.segments", "false");
    if (output_dir) set("output.dir", json_string(*output_dir));
    if (format) set("output.format", json_string(*format));
    if (levels) set("solver.levels", json_value(*levels));
    if (n_max) set("solver.n_max", json_value(*n_max));
    if (tol) set("solver.tol", json_value(*tol));
    if (diagonal) set("solver.diagonal", json_string(*diagonal));
    if (threads) set("threads", json_value(*threads));
    if (seed) set("seed", json_value(*seed));
    overrides.insert(overrides.end(), assignments.begin(), assignments.end());

    ringcirc::RunConfig config;
    try {
        config = config_path ? ringcirc::load_config(*config_path, overrides) : ringcirc::parse_config("", overrides);
    } catch (const ringcirc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ringcirc::kExitConfigError;
    }
    return ringcirc::run(config, std::cout, std::cerr);
}
