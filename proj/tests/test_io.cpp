#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ringcirc/io.hpp"

using namespace ringcirc;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kExample{"preset=tableS1-qps", "command=smatrix", "bias.x=0.356", "drive.omega=12.293"};

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("ringcirc_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string config_error(std::string_view doc, const std::vector<std::string>& overrides = {})
{
    try {
        parse_config(doc, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

RunConfig small_sweep(const fs::path& dir)
{
    RunConfig c = parse_config("{}", {"preset=tableS1-qps", "command=sweep-frequency", "bias.x=0.37",
                                      "drive.omega=11.84", "grids.omega={\"lo\":-0.1,\"hi\":0.1,\"step\":0.05}"});
    c.output_dir = dir.string();
    return c;
}

} // namespace

TEST(Config, PresetExampleIsValid)
{
    const RunConfig c = parse_config("{}", kExample);
    EXPECT_EQ(c.command, Command::SMatrix);
    EXPECT_EQ(c.preset, "tableS1-qps");
    EXPECT_EQ(c.spec, preset("tableS1-qps"));
    EXPECT_EQ(c.bias.x, 0.356);
    EXPECT_EQ(c.omega, 12.293);
    EXPECT_EQ(c.power, Power::dbm(kWeakDriveDbm));
}

TEST(Config, OverridesBeatTheFile)
{
    const RunConfig c = parse_config(R"({"preset": "tableS1-jj", "command": "spectrum", "bias": {"x": 0.2}})",
                                     {"bias.x=0.3", "solver.n_max=5"});
    EXPECT_EQ(c.bias.x, 0.3);
    EXPECT_EQ(c.truncation.n_max, 5);
    EXPECT_EQ(c.spec.variant, Variant::JJ);
}

TEST(Config, EmptyDocumentListsMissingFields)
{
    const std::string msg = config_error("");
    EXPECT_NE(msg.find("missing required fields"), std::string::npos) << msg;
    EXPECT_NE(msg.find("command"), std::string::npos);
    EXPECT_NE(msg.find("preset (or circuit)"), std::string::npos);

    const fs::path dir = scratch_dir("empty");
    std::ofstream(dir / "empty.json").close();
    EXPECT_THROW(load_config(dir / "empty.json"), ConfigError);
    EXPECT_THROW(load_config(dir / "absent.json"), ConfigError);
}

TEST(Config, CommandSpecificFieldsAreRequired)
{
    const std::string msg = config_error(R"({"preset": "tableS1-qps", "command": "smatrix"})");
    EXPECT_NE(msg.find("bias.x"), std::string::npos) << msg;
    EXPECT_NE(msg.find("drive.omega"), std::string::npos) << msg;
    EXPECT_EQ(config_error(R"({"preset": "tableS1-qps", "command": "optimize"})"), "");
}

TEST(Config, ExplicitCircuitNeedsEveryField)
{
    const std::string msg = config_error(R"({"command": "optimize", "circuit": {"variant": "qps"}})");
    for (const char* key : {"circuit.tunnel_energy", "circuit.junction_mass", "circuit.coupling_mass",
                            "circuit.parasitic_mass", "circuit.g (or circuit.line_param)"}) {
        EXPECT_NE(msg.find(key), std::string::npos) << key << " in " << msg;
    }
}

TEST(Config, ConflictingCouplingSources)
{
    const std::string msg = config_error(R"({"command": "optimize", "preset": "tableS1-qps",
                                             "circuit": {"g": 1.8, "line_param": 2.0}})");
    EXPECT_NE(msg.find("conflicting coupling"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAndNamesAreErrors)
{
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "drive.omgea=12"}).find("drive.omgea"),
              std::string::npos);
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "verbose=true"}).find("verbose"),
              std::string::npos);
    EXPECT_NE(config_error("{}", {"preset=tableS2", "command=optimize"}).find("tableS2"), std::string::npos);
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=plot"}).find("plot"), std::string::npos);
    EXPECT_NE(config_error("{\"command\": "), "");
    EXPECT_NE(config_error("{}", {"noequals"}), "");
}

TEST(Config, RejectsEmptyGridsAndBadSolverSettings)
{
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "grids.x={\"lo\":0.4,\"hi\":0.3,\"step\":0.01}"}),
              "");
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "solver.levels=12"}), "");
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "solver.tol=0"}), "");
    EXPECT_NE(config_error("{}", {"preset=tableS1-qps", "command=optimize", "drive.power_dbm=-150",
                                  "drive.power_flux=0.1"}),
              "");
}

TEST(Config, SerializeRoundTrips)
{
    EXPECT_EQ(parse_config(serialize(parse_config("{}", kExample))), parse_config("{}", kExample));

    RunConfig c = parse_config("{}", {"preset=tableS1-jj", "command=disorder"});
    c.preset.reset();
    c.spec.direct_coupling = 1.7;
    c.spec.line_param.reset();
    c.spec.tunnel_energy = {7.1, 7.25, 7.0 + 1.0 / 3.0};
    c.bias.x = 0.1 + 0.2;
    c.bias.segment = {0.3, 1.0 / 3.0, 0.36};
    c.bias.n0 = 2;
    c.power = Power::flux(1.0 / 7.0);
    c.omega_grid = {-0.3, 0.3, 0.01};
    c.segment_nodes = {1, 2};
    c.disorder_axes = DisorderAxes::JunctionMass;
    c.disorder_elements = {0, 2};
    c.direction = Direction::CounterClockwise;
    c.optimize_segments = false;
    c.truncation = {5, 6};
    c.diagonal = DiagonalAssignment::Lowering;
    c.tol = 3e-7;
    c.output_dir = "out dir/ünï";
    c.format = OutputFormat::Csv;
    c.threads = 3;
    c.seed = 42;
    EXPECT_EQ(parse_config(serialize(c)), c);
}

TEST(Config, NamesRoundTrip)
{
    for (auto cmd : {Command::Spectrum, Command::SMatrix, Command::SweepFrequency, Command::SweepPower,
                     Command::SweepBias, Command::MapSegmentBias, Command::Optimize, Command::Disorder}) {
        EXPECT_EQ(command_from_string(to_string(cmd)), cmd);
    }
    for (auto f : {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Both}) {
        EXPECT_EQ(format_from_string(to_string(f)), f);
    }
    EXPECT_EQ((GridSpec{0.0, 0.3, 0.1}.values().size()), 4u);
}

TEST(Csv, FixedHeaderAndFullPrecision)
{
    SweepResult sw;
    SweepPoint ok;
    ok.coords = {0.1, 0.0};
    ok.s.s[2][0] = 1.0 / 3.0;
    SweepPoint bad;
    bad.coords = {0.2, 0.0};
    bad.converged = false;
    for (auto& row : bad.s.s) {
        row.fill(std::numeric_limits<double>::quiet_NaN());
    }
    sw.points = {ok, bad};
    std::istringstream csv(sweep_csv(sw));
    std::string header, first, second;
    std::getline(csv, header);
    std::getline(csv, first);
    std::getline(csv, second);
    EXPECT_EQ(header, kCsvHeader);
    EXPECT_NE(first.find("0.33333333333333331"), std::string::npos) << first;
    EXPECT_NE(first.find(",1,"), std::string::npos);
    EXPECT_NE(second.find("nan"), std::string::npos);
    EXPECT_NE(second.find(",0,"), std::string::npos);
}

TEST(Run, DecoupledSMatrixIsIdentity)
{
    const fs::path dir = scratch_dir("identity");
    RunConfig c = parse_config("{}", kExample);
    c.spec.line_param.reset();
    c.spec.direct_coupling = 0.0;
    c.output_dir = dir.string();
    std::ostringstream out, err;
    ASSERT_EQ(run(c, out, err), kExitOk) << err.str();
    const auto doc = nlohmann::json::parse(slurp(dir / "smatrix.json"));
    EXPECT_EQ(doc.at("schema_version"), kSchemaVersion);
    const auto s = doc.at("result").at("s");
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_EQ(s.at(i).at(j).get<double>(), i == j ? 1.0 : 0.0);
        }
    }
    EXPECT_EQ(parse_config(doc.at("config").dump()), c);
    EXPECT_TRUE(fs::exists(dir / "smatrix.csv"));
    EXPECT_NE(out.str().find("dB"), std::string::npos);
}

TEST(Run, SweepCsvIsBitReproducible)
{
    const fs::path a = scratch_dir("repro_a");
    const fs::path b = scratch_dir("repro_b");
    RunConfig ca = small_sweep(a);
    ca.threads = 1;
    RunConfig cb = small_sweep(b);
    cb.threads = 4;
    std::ostringstream out, err;
    ASSERT_EQ(run(ca, out, err), kExitOk) << err.str();
    ASSERT_EQ(run(cb, out, err), kExitOk) << err.str();
    const std::string csv = slurp(a / "sweep-frequency.csv");
    EXPECT_EQ(csv, slurp(b / "sweep-frequency.csv"));
    EXPECT_EQ(csv.substr(0, kCsvHeader.size()), kCsvHeader);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Run, FormatSelectsArtifacts)
{
    const fs::path dir = scratch_dir("format");
    RunConfig c = small_sweep(dir);
    c.format = OutputFormat::Json;
    std::ostringstream out, err;
    ASSERT_EQ(run(c, out, err), kExitOk);
    EXPECT_TRUE(fs::exists(dir / "sweep-frequency.json"));
    EXPECT_FALSE(fs::exists(dir / "sweep-frequency.csv"));
}

TEST(Run, ConfigProblemsExitWithThree)
{
    const fs::path dir = scratch_dir("bad");
    std::ofstream(dir / "file").close();
    RunConfig c = parse_config("{}", kExample);
    c.output_dir = (dir / "file" / "sub").string();
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), kExitConfigError);

    c.output_dir = dir.string();
    c.omega = 45.0;
    EXPECT_EQ(run(c, out, err), kExitConfigError);
    EXPECT_NE(err.str().find("config error"), std::string::npos);
}
