#include "ringcirc/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ringcirc/units.hpp"

namespace ringcirc {

namespace {

using json = nlohmann::json;

struct CommandName {
    Command command;
    std::string_view name;
};
constexpr std::array<CommandName, 8> kCommands{{
    {Command::Spectrum, "spectrum"},
    {Command::SMatrix, "smatrix"},
    {Command::SweepFrequency, "sweep-frequency"},
    {Command::SweepPower, "sweep-power"},
    {Command::SweepBias, "sweep-bias"},
    {Command::MapSegmentBias, "map-segment-bias"},
    {Command::Optimize, "optimize"},
    {Command::Disorder, "disorder"},
}};

/// Walks a JSON object, remembering which keys were read so leftovers can be reported.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            throw ConfigError("'" + (path_.empty() ? std::string("<root>") : path_) + "' must be an object");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key)
    {
        try {
            return at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("'" + full(key) + "' has the wrong type");
        }
    }

    template <class T>
    void maybe(const std::string& key, T& out)
    {
        if (has(key)) {
            out = get<T>(key);
        }
    }

    Reader child(const std::string& key) { return Reader(at(key), full(key)); }

    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void collect_unknown(std::vector<std::string>& out) const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                out.push_back(full(key));
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::array<int, 2> one_based_pair(const std::vector<int>& v, const std::string& what)
{
    if (v.size() != 2 || v[0] < 1 || v[0] > 3 || v[1] < 1 || v[1] > 3 || v[0] == v[1]) {
        throw ConfigError("'" + what + "' must be two distinct indices in 1..3");
    }
    return {v[0] - 1, v[1] - 1};
}

GridSpec read_grid(Reader& parent, const std::string& key, GridSpec grid, std::vector<std::string>& unknown)
{
    Reader r = parent.child(key);
    r.maybe("lo", grid.lo);
    r.maybe("hi", grid.hi);
    r.maybe("step", grid.step);
    r.collect_unknown(unknown);
    if (!(grid.step > 0.0) || grid.hi < grid.lo) {
        throw ConfigError("grid '" + parent.full(key) + "' is empty (need step > 0 and hi >= lo)");
    }
    return grid;
}

json grid_json(const GridSpec& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}}; }

std::string_view direction_name(Direction d) { return d == Direction::Clockwise ? "clockwise" : "counter-clockwise"; }

Direction direction_from_string(std::string_view s)
{
    if (s == "clockwise" || s == "cw") {
        return Direction::Clockwise;
    }
    if (s == "counter-clockwise" || s == "ccw") {
        return Direction::CounterClockwise;
    }
    throw ConfigError("unknown direction '" + std::string(s) + "'");
}

std::string_view diagonal_name(DiagonalAssignment d) { return d == DiagonalAssignment::Excluded ? "excluded" : "lowering"; }

DiagonalAssignment diagonal_from_string(std::string_view s)
{
    if (s == "excluded") {
        return DiagonalAssignment::Excluded;
    }
    if (s == "lowering") {
        return DiagonalAssignment::Lowering;
    }
    throw ConfigError("unknown diagonal assignment '" + std::string(s) + "' (excluded|lowering)");
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object()) {
            throw ConfigError("override '" + key + "' descends into a non-object");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            break;
        }
        node = &(*node)[part];
        if (node->is_null()) {
            *node = json::object();
        }
        start = dot + 1;
    }
}

bool needs_x(Command c)
{
    return c == Command::Spectrum || c == Command::SMatrix || c == Command::SweepFrequency
        || c == Command::SweepPower || c == Command::MapSegmentBias;
}

bool needs_omega(Command c)
{
    return c == Command::SMatrix || c == Command::SweepFrequency || c == Command::SweepPower
        || c == Command::SweepBias || c == Command::MapSegmentBias;
}

void read_circuit(Reader r, RunConfig& c, bool from_preset, std::vector<std::string>& missing,
                  std::vector<std::string>& unknown)
{
    PhysicalSpec& s = c.spec;
    if (r.has("variant")) {
        s.variant = variant_from_string(r.get<std::string>("variant"));
    } else if (!from_preset) {
        missing.push_back("circuit.variant");
    }
    const std::array<std::pair<const char*, std::array<double, 3>*>, 4> arrays{{
        {"tunnel_energy", &s.tunnel_energy},
        {"junction_mass", &s.junction_mass},
        {"coupling_mass", &s.coupling_mass},
        {"parasitic_mass", &s.parasitic_mass},
    }};
    for (const auto& [key, target] : arrays) {
        if (r.has(key)) {
            *target = r.get<std::array<double, 3>>(key);
        } else if (!from_preset) {
            missing.push_back(std::string("circuit.") + key);
        }
    }
    const bool has_g = r.has("g");
    const bool has_line = r.has("line_param");
    if (has_g && has_line) {
        throw ConfigError("conflicting coupling sources: set either circuit.g or circuit.line_param, not both");
    }
    if (has_g) {
        s.direct_coupling = r.get<double>("g");
        s.line_param.reset();
    } else if (has_line) {
        s.line_param = r.get<double>("line_param");
        s.direct_coupling.reset();
    } else if (!from_preset) {
        missing.push_back("circuit.g (or circuit.line_param)");
    }
    r.maybe("reference_omega", s.reference_omega);
    r.collect_unknown(unknown);
}

json circuit_json(const PhysicalSpec& s)
{
    json j{
        {"variant", std::string(to_string(s.variant))},
        {"tunnel_energy", s.tunnel_energy},
        {"junction_mass", s.junction_mass},
        {"coupling_mass", s.coupling_mass},
        {"parasitic_mass", s.parasitic_mass},
        {"reference_omega", s.reference_omega},
    };
    if (s.direct_coupling) {
        j["g"] = *s.direct_coupling;
    }
    if (s.line_param) {
        j["line_param"] = *s.line_param;
    }
    return j;
}

json config_json(const RunConfig& c)
{
    json j;
    j["command"] = std::string(to_string(c.command));
    if (c.preset) {
        j["preset"] = *c.preset;
    }
    j["circuit"] = circuit_json(c.spec);
    j["bias"] = {{"x", c.bias.x}, {"segment", c.bias.segment}};
    if (c.bias.n0) {
        j["bias"]["n0"] = *c.bias.n0;
    }
    j["drive"] = {{"omega", c.omega}};
    if (c.power.unit == Power::Unit::DBm) {
        j["drive"]["power_dbm"] = c.power.value;
    } else {
        j["drive"]["power_flux"] = c.power.value;
    }
    j["grids"] = {
        {"omega", grid_json(c.omega_grid)},
        {"power", grid_json(c.power_grid)},
        {"x", grid_json(c.x_grid)},
        {"segment", grid_json(c.segment_grid)},
    };
    j["segment_nodes"] = {c.segment_nodes[0] + 1, c.segment_nodes[1] + 1};
    j["disorder"] = {
        {"axes", std::string(to_string(c.disorder_axes))},
        {"elements", {c.disorder_elements[0] + 1, c.disorder_elements[1] + 1}},
        {"grid", grid_json(c.disorder_grid)},
    };
    j["optimizer"] = {{"direction", std::string(direction_name(c.direction))}, {"segments", c.optimize_segments}};
    j["solver"] = {
        {"n_max", c.truncation.n_max},
        {"levels", c.truncation.levels},
        {"tol", c.tol},
        {"diagonal", std::string(diagonal_name(c.diagonal))},
    };
    j["output"] = {{"dir", c.output_dir}, {"format", std::string(to_string(c.format))}};
    j["threads"] = c.threads;
    j["seed"] = c.seed;
    return j;
}

RunConfig parse_json(const json& doc)
{
    RunConfig c;
    std::vector<std::string> missing;
    std::vector<std::string> unknown;
    Reader root(doc, "");

    if (root.has("command")) {
        c.command = command_from_string(root.get<std::string>("command"));
    } else {
        missing.push_back("command");
    }

    if (root.has("preset")) {
        c.preset = root.get<std::string>("preset");
        c.spec = preset(*c.preset);
    }
    if (root.has("circuit")) {
        read_circuit(root.child("circuit"), c, c.preset.has_value(), missing, unknown);
    } else if (!c.preset) {
        missing.push_back("preset (or circuit)");
    }

    bool have_x = false;
    if (root.has("bias")) {
        Reader b = root.child("bias");
        have_x = b.has("x");
        b.maybe("x", c.bias.x);
        b.maybe("segment", c.bias.segment);
        if (b.has("n0")) {
            c.bias.n0 = b.get<int>("n0");
        }
        b.collect_unknown(unknown);
    }

    bool have_omega = false;
    if (root.has("drive")) {
        Reader d = root.child("drive");
        have_omega = d.has("omega");
        d.maybe("omega", c.omega);
        if (d.has("power_dbm") && d.has("power_flux")) {
            throw ConfigError("set either drive.power_dbm or drive.power_flux, not both");
        }
        if (d.has("power_dbm")) {
            c.power = Power::dbm(d.get<double>("power_dbm"));
        }
        if (d.has("power_flux")) {
            c.power = Power::flux(d.get<double>("power_flux"));
            if (!(c.power.value > 0.0)) {
                throw ConfigError("drive.power_flux must be positive");
            }
        }
        d.collect_unknown(unknown);
    }
    if (!(c.omega > 0.0)) {
        throw ConfigError("drive.omega must be positive");
    }

    if (root.has("grids")) {
        Reader g = root.child("grids");
        if (g.has("omega")) {
            c.omega_grid = read_grid(g, "omega", c.omega_grid, unknown);
        }
        if (g.has("power")) {
            c.power_grid = read_grid(g, "power", c.power_grid, unknown);
        }
        if (g.has("x")) {
            c.x_grid = read_grid(g, "x", c.x_grid, unknown);
        }
        if (g.has("segment")) {
            c.segment_grid = read_grid(g, "segment", c.segment_grid, unknown);
        }
        g.collect_unknown(unknown);
    }
    if (root.has("segment_nodes")) {
        c.segment_nodes = one_based_pair(root.get<std::vector<int>>("segment_nodes"), "segment_nodes");
    }
    if (root.has("disorder")) {
        Reader d = root.child("disorder");
        if (d.has("axes")) {
            c.disorder_axes = disorder_axes_from_string(d.get<std::string>("axes"));
        }
        if (d.has("elements")) {
            c.disorder_elements = one_based_pair(d.get<std::vector<int>>("elements"), "disorder.elements");
        }
        if (d.has("grid")) {
            c.disorder_grid = read_grid(d, "grid", c.disorder_grid, unknown);
        }
        d.collect_unknown(unknown);
    }
    if (root.has("optimizer")) {
        Reader o = root.child("optimizer");
        if (o.has("direction")) {
            c.direction = direction_from_string(o.get<std::string>("direction"));
        }
        o.maybe("segments", c.optimize_segments);
        o.collect_unknown(unknown);
    }
    if (root.has("solver")) {
        Reader s = root.child("solver");
        s.maybe("n_max", c.truncation.n_max);
        s.maybe("levels", c.truncation.levels);
        s.maybe("tol", c.tol);
        if (s.has("diagonal")) {
            c.diagonal = diagonal_from_string(s.get<std::string>("diagonal"));
        }
        s.collect_unknown(unknown);
    }
    if (root.has("output")) {
        Reader o = root.child("output");
        o.maybe("dir", c.output_dir);
        if (o.has("format")) {
            c.format = format_from_string(o.get<std::string>("format"));
        }
        o.collect_unknown(unknown);
    }
    root.maybe("threads", c.threads);
    root.maybe("seed", c.seed);
    root.collect_unknown(unknown);

    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) {
            msg += " " + k;
        }
        throw ConfigError(msg);
    }
    if (root.has("command")) {
        if (needs_x(c.command) && !have_x) {
            missing.push_back("bias.x");
        }
        if (needs_omega(c.command) && !have_omega) {
            missing.push_back("drive.omega");
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing required fields:";
        for (const auto& k : missing) {
            msg += " " + k;
        }
        throw ConfigError(msg);
    }

    c.spec.validate();
    if (c.truncation.n_max < 2 || c.truncation.levels < 2) {
        throw ConfigError("solver.n_max and solver.levels must be at least 2");
    }
    if (c.truncation.levels > 8) {
        throw ConfigError("solver.levels must be at most 8");
    }
    if (!(c.tol > 0.0)) {
        throw ConfigError("solver.tol must be positive");
    }
    if (c.threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
    if (c.output_dir.empty()) {
        throw ConfigError("output.dir must not be empty");
    }
    return c;
}

std::string fmt17(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream os;
    os << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json smatrix_json(const SMatrix& s)
{
    json j;
    j["s"] = s.s;
    j["bias"] = {{"x", s.meta.bias.x}, {"segment", s.meta.bias.segment}};
    if (s.meta.bias.n0) {
        j["bias"]["n0"] = *s.meta.bias.n0;
    }
    j["omega"] = s.meta.omega;
    j["power_dbm"] = s.meta.power_dbm;
    j["input_flux"] = s.meta.input_flux;
    j["g"] = s.meta.g;
    j["method"] = s.meta.method;
    j["residual"] = s.meta.residual;
    j["converged"] = s.meta.converged;
    return j;
}

json sweep_json(const SweepResult& sweep)
{
    json j;
    j["axes"] = json::array();
    for (const auto& a : sweep.axes) {
        j["axes"].push_back({{"name", a.name}, {"unit", a.unit}, {"grid", a.grid}});
    }
    j["points"] = json::array();
    for (const auto& p : sweep.points) {
        json q = smatrix_json(p.s);
        q["coords"] = p.coords;
        q["converged"] = p.converged;
        if (!p.error.empty()) {
            q["error"] = p.error;
        }
        q["eigenfrequencies"] = std::vector<double>(p.eigenfrequencies.data(),
                                                    p.eigenfrequencies.data() + p.eigenfrequencies.size());
        j["points"].push_back(std::move(q));
    }
    j["scalars"] = sweep.scalars;
    return j;
}

json optimum_json(const OptimizationResult& r, bool with_trace)
{
    json j = smatrix_json(r.s);
    j["achieved"] = r.achieved;
    j["optimizer_converged"] = r.converged;
    j["no_basin"] = r.no_basin;
    j["flag"] = r.flag;
    j["evaluations"] = r.evaluations;
    if (with_trace) {
        j["trace"] = json::array();
        for (const auto& t : r.trace) {
            j["trace"].push_back({t.x, t.segment[0], t.segment[1], t.segment[2], t.omega, t.objective});
        }
        j["trace_columns"] = {"x", "N1", "N2", "N3", "omega", "objective"};
    }
    return j;
}

class Artifacts {
public:
    explicit Artifacts(const RunConfig& c) : config_(c), dir_(c.output_dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) {
            throw ConfigError("output directory '" + c.output_dir + "' cannot be created");
        }
    }

    void csv(const std::string& text) const
    {
        if (config_.format != OutputFormat::Json) {
            write(std::string(to_string(config_.command)) + ".csv", text);
        }
    }

    void json_doc(json result) const
    {
        if (config_.format == OutputFormat::Csv) {
            return;
        }
        json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["generated_at"] = timestamp();
        doc["command"] = std::string(to_string(config_.command));
        doc["config"] = config_json(config_);
        doc["result"] = std::move(result);
        write(std::string(to_string(config_.command)) + ".json", doc.dump(2) + "\n");
    }

private:
    void write(const std::string& name, const std::string& text) const
    {
        const auto path = dir_ / name;
        std::ofstream f(path, std::ios::binary);
        f << text;
        if (!f) {
            throw ConfigError("cannot write '" + path.string() + "'");
        }
    }

    const RunConfig& config_;
    std::filesystem::path dir_;
};

void print_smatrix(std::ostream& out, const SMatrix& s)
{
    out << "S-matrix (dB)        in 1      in 2      in 3\n";
    for (int i = 0; i < 3; ++i) {
        out << "  out " << i + 1 << "        ";
        for (int j = 0; j < 3; ++j) {
            out << std::setw(10) << std::fixed << std::setprecision(2) << units::to_db(std::max(0.0, s(i, j)));
        }
        out << "\n";
    }
    out << "  column sums     ";
    for (int j = 0; j < 3; ++j) {
        out << std::setw(10) << std::setprecision(6) << s.column_sum(j);
    }
    out << "\n  method " << s.meta.method << ", residual " << std::scientific << std::setprecision(2)
        << s.meta.residual << std::defaultfloat << "\n";
}

void print_bias(std::ostream& out, const BiasPoint& b, double omega)
{
    out << std::fixed << std::setprecision(5) << "X = " << b.x << ", N_S = (" << b.segment[0] << ", "
        << b.segment[1] << ", " << b.segment[2] << ")";
    if (b.n0) {
        out << ", N0 = " << *b.n0;
    }
    out << ", omega = " << omega << " rad/ns\n" << std::defaultfloat;
}

int sweep_exit(const SweepResult& sweep, std::ostream& out)
{
    std::size_t failed = 0;
    for (const auto& p : sweep.points) {
        failed += p.converged ? 0 : 1;
    }
    out << sweep.points.size() << " points, " << failed << " not converged\n";
    return failed == 0 ? kExitOk : kExitNonConvergence;
}

int execute(const RunConfig& c, std::ostream& out)
{
    const Artifacts artifacts(c);
    const SolverOptions solver = c.solver_options();
    out << "ringcirc " << to_string(c.command);
    if (c.preset) {
        out << " (preset " << *c.preset << ")";
    }
    out << "\n";

    switch (c.command) {
    case Command::Spectrum: {
        const RingEigensystem sys = solve_ring(dual_map(c.spec), c.bias, c.truncation, c.diagonal);
        std::ostringstream csv;
        csv << "level,energy,excitation\n";
        json levels = json::array();
        print_bias(out, sys.bias, c.omega);
        out << "level      E (rad/ns)   E - E0 (rad/ns)\n";
        for (int m = 0; m < sys.levels(); ++m) {
            const double e = sys.energies(m);
            const double x = e - sys.energies(0);
            csv << m << "," << fmt17(e) << "," << fmt17(x) << "\n";
            levels.push_back({{"level", m}, {"energy", e}, {"excitation", x}});
            out << std::setw(5) << m << std::setw(16) << std::fixed << std::setprecision(6) << e << std::setw(16) << x
                << "\n";
        }
        out << std::defaultfloat;
        artifacts.csv(csv.str());
        artifacts.json_doc({{"n0", *sys.bias.n0}, {"levels", levels}});
        return kExitOk;
    }
    case Command::SMatrix: {
        const SMatrix s = s_matrix(c.spec, c.bias, c.omega, c.power, solver);
        SweepResult sweep;
        sweep.axes = {{"x", "", {c.bias.x}}, {"omega", "rad/ns", {c.omega}}};
        SweepPoint p;
        p.coords = {c.bias.x, c.omega};
        p.s = s;
        p.converged = s.meta.converged;
        sweep.points.push_back(p);
        print_bias(out, s.meta.bias, c.omega);
        print_smatrix(out, s);
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc(smatrix_json(s));
        return s.meta.converged ? kExitOk : kExitNonConvergence;
    }
    case Command::SweepFrequency: {
        std::vector<double> omegas;
        for (double d : c.omega_grid.values()) {
            omegas.push_back(c.omega + d);
        }
        SweepResult sweep = frequency_sweep(c.spec, c.bias, omegas, c.power, solver);
        const double bw = bandwidth(sweep, c.omega);
        sweep.scalars["bandwidth"] = bw;
        sweep.scalars["omega_center"] = c.omega;
        // Report detuning on the CSV axis.
        SweepResult detuned = sweep;
        for (auto& p : detuned.points) {
            p.coords[0] -= c.omega;
        }
        artifacts.csv(sweep_csv(detuned));
        artifacts.json_doc(sweep_json(sweep));
        print_bias(out, sweep.points.empty() ? c.bias : sweep.points.front().s.meta.bias, c.omega);
        out << "-10 dB bandwidth: " << bw << " rad/ns (" << bw * 1000.0 << " MHz)\n";
        if (!sweep.points.empty()) {
            const auto& e = sweep.points.front().eigenfrequencies;
            out << "ring levels E_m - E_0:";
            for (Eigen::Index m = 1; m < e.size(); ++m) {
                out << " " << e(m);
            }
            out << " rad/ns\n";
        }
        return sweep_exit(sweep, out);
    }
    case Command::SweepPower: {
        SweepResult sweep = power_sweep(c.spec, c.bias, c.omega, c.power_grid.values(), solver);
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc(sweep_json(sweep));
        print_bias(out, sweep.points.empty() ? c.bias : sweep.points.front().s.meta.bias, c.omega);
        if (sweep.scalars.contains("compression_dbm")) {
            out << "1 dB compression: " << sweep.scalars["compression_dbm"] << " dBm ("
                << sweep.scalars["compression_photons_per_s"] << " photons/s)\n";
        } else {
            out << "1 dB compression: not reached in the swept range\n";
        }
        return sweep_exit(sweep, out);
    }
    case Command::SweepBias: {
        SweepResult sweep = central_bias_sweep(c.spec, c.bias.segment, c.omega, c.x_grid.values(), c.power, solver);
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc(sweep_json(sweep));
        double best = -1.0;
        double best_x = 0.0;
        for (const auto& p : sweep.points) {
            if (p.converged && p.s(2, 0) > best) {
                best = p.s(2, 0);
                best_x = p.coords[0];
            }
        }
        out << "max S31 = " << best << " at X = " << best_x << "\n";
        return sweep_exit(sweep, out);
    }
    case Command::MapSegmentBias: {
        const auto grid = c.segment_grid.values();
        SweepResult sweep = segment_bias_map(c.spec, c.bias, c.omega, grid, grid, c.segment_nodes, c.power, solver);
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc(sweep_json(sweep));
        double worst = 0.0;
        for (const auto& p : sweep.points) {
            if (p.converged) {
                worst = std::max(worst, 1.0 - p.s(2, 0));
            }
        }
        out << "worst 1 - S31 over the map: " << worst << "\n";
        return sweep_exit(sweep, out);
    }
    case Command::Optimize: {
        const OptimizationResult r = optimize_bias(c.spec, c.omega, c.optimizer_options());
        SweepResult sweep;
        sweep.axes = {{"x", "", {r.bias.x}}, {"omega", "rad/ns", {r.omega}}};
        SweepPoint p;
        p.coords = {r.bias.x, r.omega};
        p.s = r.s;
        p.converged = r.s.meta.converged && r.converged;
        sweep.points.push_back(p);
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc(optimum_json(r, true));
        out << "optimum: ";
        print_bias(out, r.bias, r.omega);
        out << (c.direction == Direction::Clockwise ? "S31" : "S13") << " = " << r.achieved << " after "
            << r.evaluations << " evaluations" << (r.converged ? "" : " (simplex hit the iteration limit)") << "\n";
        if (!r.flag.empty()) {
            out << "flag: " << r.flag << "\n";
        }
        print_smatrix(out, r.s);
        return kExitOk;
    }
    case Command::Disorder: {
        DisorderOptions d;
        d.axes = c.disorder_axes;
        d.elements = c.disorder_elements;
        d.grid_a = c.disorder_grid.values();
        d.grid_b = d.grid_a;
        d.omega_hint = c.omega;
        d.optimizer = c.optimizer_options();
        const DisorderStudy study = disorder_study(c.spec, d);

        SweepResult sweep;
        sweep.axes = {{"d" + std::string(to_string(d.axes)) + std::to_string(d.elements[0] + 1), "", d.grid_a},
                      {"d" + std::string(to_string(d.axes)) + std::to_string(d.elements[1] + 1), "", d.grid_b}};
        json points = json::array();
        double worst = 1.0;
        bool flagged = false;
        for (const auto& r : study.realizations) {
            SweepPoint p;
            p.coords = {r.delta_a, r.delta_b};
            p.s = r.optimum.s;
            p.converged = r.optimum.s.meta.converged && r.optimum.converged;
            sweep.points.push_back(p);
            json q = optimum_json(r.optimum, false);
            q["coords"] = p.coords;
            points.push_back(std::move(q));
            worst = std::min(worst, r.optimum.achieved);
            flagged = flagged || r.optimum.no_basin;
        }
        artifacts.csv(sweep_csv(sweep));
        artifacts.json_doc({{"reference", optimum_json(study.reference, false)}, {"points", points}});
        out << "reference optimum: ";
        print_bias(out, study.reference.bias, study.reference.omega);
        out << "reference S31 = " << study.reference.achieved << ", worst re-optimised S31 = " << worst << "\n";
        if (flagged) {
            out << "flag: no circulation basin found at one or more points\n";
        }
        return sweep_exit(sweep, out);
    }
    }
    return kExitOk;
}

} // namespace

std::string_view to_string(Command c)
{
    for (const auto& k : kCommands) {
        if (k.command == c) {
            return k.name;
        }
    }
    return "?";
}

Command command_from_string(std::string_view name)
{
    for (const auto& k : kCommands) {
        if (k.name == name) {
            return k.command;
        }
    }
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat f)
{
    switch (f) {
    case OutputFormat::Csv:
        return "csv";
    case OutputFormat::Json:
        return "json";
    case OutputFormat::Both:
        return "both";
    }
    return "?";
}

OutputFormat format_from_string(std::string_view name)
{
    if (name == "csv") {
        return OutputFormat::Csv;
    }
    if (name == "json") {
        return OutputFormat::Json;
    }
    if (name == "both") {
        return OutputFormat::Both;
    }
    throw ConfigError("unknown output format '" + std::string(name) + "' (csv|json|both)");
}

std::vector<double> GridSpec::values() const { return arange(lo, hi, step); }

SolverOptions RunConfig::solver_options() const
{
    SolverOptions s;
    s.truncation = truncation;
    s.diagonal = diagonal;
    s.time_domain.tol = tol;
    s.threads = threads;
    return s;
}

OptimizerOptions RunConfig::optimizer_options() const
{
    OptimizerOptions o;
    o.direction = direction;
    o.optimize_segments = optimize_segments;
    o.segment = bias.segment;
    o.seed = seed;
    o.power = power;
    o.solver = solver_options();
    return o;
}

RunConfig parse_config(std::string_view document, const std::vector<std::string>& overrides)
{
    json doc;
    const bool blank = document.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (blank) {
        doc = json::object();
    } else {
        try {
            doc = json::parse(document);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return parse_json(doc);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream text;
    text << f.rdbuf();
    return parse_config(text.str(), overrides);
}

std::string serialize(const RunConfig& config) { return config_json(config).dump(2) + "\n"; }

std::string sweep_csv(const SweepResult& sweep)
{
    std::ostringstream os;
    os << kCsvHeader << "\n";
    for (const auto& p : sweep.points) {
        os << fmt17(p.coords[0]) << "," << fmt17(p.coords[1]);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                os << "," << fmt17(p.s(i, j));
            }
        }
        os << "," << (p.converged ? 1 : 0) << "," << fmt17(p.s.meta.residual) << "\n";
    }
    return os.str();
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        return execute(config, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ConvergenceError& e) {
        err << "solver did not converge: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const Error& e) {
        err << "solver error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "output error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

} // namespace ringcirc
