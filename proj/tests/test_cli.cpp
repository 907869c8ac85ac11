#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rydmf/config.hpp"
#include "rydmf/io.hpp"
#include "rydmf/runner.hpp"

using namespace rydmf;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"params": {"omega": 0.7, "delta0": 3.5, "vbar": -12.0}})";

std::string error_of(const std::string& text, Protocol p = Protocol::integrate, const FlagOverrides& f = {}) {
  try {
    parse_config(text, p, f);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("rydmf_test_" + name);
  fs::remove_all(d);
  return d;
}

nlohmann::json run_manifest(const RunConfig& c, const std::string& name) {
  const auto dir = scratch_dir(name);
  run(c, dir);
  return nlohmann::json::parse(slurp(dir / "manifest.json"));
}

}  // namespace

TEST(Config, MinimalIntegrateAccepted) {
  const auto c = parse_config(kMinimal, Protocol::integrate);
  EXPECT_EQ(c.params, kBistableReference);
  EXPECT_FALSE(c.drive.has_value());
}

TEST(Config, NegativeGamma) {
  EXPECT_EQ(error_of(R"({"params": {"omega": 0.7, "delta0": 3.5, "vbar": -12, "gamma": -1}})"),
            "gamma must be positive");
}

TEST(Config, FlagOverridesFile) {
  const std::string text =
      R"({"params": {"omega": 0.7, "delta0": 3.5, "vbar": -12}, "drive": {"kick_amplitude": -5.0}})";
  FlagOverrides f;
  f.kick_amp = -9.5;
  f.omega = 0.8;
  const auto c = parse_config(text, Protocol::integrate, f);
  EXPECT_DOUBLE_EQ(c.drive->amplitude, -9.5);
  EXPECT_DOUBLE_EQ(c.params.omega, 0.8);
  EXPECT_DOUBLE_EQ(parse_config(text, Protocol::integrate).drive->amplitude, -5.0);
}

TEST(Config, FlagsAloneSuffice) {
  FlagOverrides f;
  f.omega = 0.5;
  f.delta0 = 0.0;
  f.vbar = 0.0;
  f.kick_tau = 3.0;
  const auto c = parse_config("", Protocol::integrate, f);
  ASSERT_TRUE(c.drive.has_value());
  EXPECT_DOUBLE_EQ(c.drive->duration, 3.0);
  EXPECT_DOUBLE_EQ(c.drive->period, 50.0);
}

TEST(Config, UnknownKeysNamed) {
  EXPECT_EQ(error_of(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0}, "colour": 1})"), "unknown key 'colour'");
  EXPECT_EQ(error_of(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0, "gama": 1}})"),
            "unknown key 'params.gama'");
  EXPECT_EQ(error_of(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0}, "drive": {"periode": 3}})"),
            "unknown key 'drive.periode'");
}

TEST(Config, TypeMismatchAndMissingNamed) {
  EXPECT_EQ(error_of(R"({"params": {"omega": "fast", "delta0": 0, "vbar": 0}})"),
            "type mismatch for 'params.omega': expected number");
  EXPECT_EQ(error_of(R"({"params": {"omega": 1, "vbar": 0}})"), "missing required field 'params.delta0'");
  EXPECT_EQ(error_of(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0}})", Protocol::scan),
            "missing required field 'drive' for protocol scan");
  EXPECT_NE(error_of("{not json"), "");
}

TEST(Config, ProtocolMismatch) {
  EXPECT_NE(error_of(R"({"protocol": "basin", "params": {"omega": 1, "delta0": 0, "vbar": 0}})"), "");
  EXPECT_EQ(error_of(R"({"protocol": "integrate", "params": {"omega": 1, "delta0": 0, "vbar": 0}})"), "");
}

TEST(Config, AxisForms) {
  const auto a = parse_config(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0},
                                  "grid": {"delta": [0, 1, 3], "omega": {"lo": 0, "hi": 1, "n": 5}}})",
                              Protocol::bistability_map);
  EXPECT_EQ(a.delta_axis.values, (std::vector<double>{0, 1, 3}));
  EXPECT_EQ(a.omega_axis.values.size(), 5u);
  EXPECT_NE(error_of(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0}, "grid": {"delta": [0, 2, 1]}})",
                     Protocol::hysteresis),
            "");
}

TEST(Config, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(RYDMF_CONFIG_DIR)) {
    const auto doc = nlohmann::json::parse(slurp(e.path()));
    EXPECT_NO_THROW(parse_config(doc, protocol_from_string(doc.at("protocol")), {})) << e.path();
    ++n;
  }
  EXPECT_EQ(n, protocol_names().size());
}

TEST(Csv, DoubleFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -0.0}) {
    EXPECT_EQ(io::parse_double(io::format_double(v)), v);
  }
  EXPECT_TRUE(std::isnan(io::parse_double(io::format_double(NAN))));
  EXPECT_THROW(io::parse_double("1.0x"), ValidationError);
}

TEST(Csv, TimeSeriesRoundTrip) {
  const auto ts = integrate({0, 0, 0}, kBistableReference, default_drive(-10.0), 0.0, 60.0, 0.25);
  std::stringstream ss;
  io::write_csv(ss, io::to_table(ts));
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  EXPECT_EQ(header, "t[1/gamma],sigma_x[1],sigma_y[1],n_r[1],delta_c[gamma],transmission[arb]");
  const auto back = io::time_series_from_table(io::read_csv(ss));
  EXPECT_EQ(back.channel_names(), ts.channel_names());
  for (const auto& c : ts.channel_names()) EXPECT_EQ(back.channel(c), ts.channel(c));
  EXPECT_DOUBLE_EQ(back.dt(), ts.dt());
}

TEST(Csv, PhaseMapRoundTrip) {
  const auto m = bistability_map(uniform_axis(0.5, 0.9, 3), uniform_axis(2.0, 5.0, 4), kBistableReference);
  std::stringstream ss;
  io::write_csv(ss, io::to_table(std::vector<const PhaseMap*>{&m.sweep_difference, &m.stable_count}));
  const auto t = io::read_csv(ss);
  const auto back = io::phase_map_from_table(t, "stable_count");
  EXPECT_EQ(back.x, m.stable_count.x);
  EXPECT_EQ(back.y, m.stable_count.y);
  EXPECT_EQ(back.values, m.stable_count.values);
  EXPECT_EQ(io::phase_map_from_table(t, "sweep_difference").values, m.sweep_difference.values);
}

TEST(Csv, FixedPointTableCarriesSpectrum) {
  const auto fps = fixed_points(kBistableReference);
  std::stringstream ss;
  io::write_csv(ss, io::to_table(fps));
  const auto t = io::read_csv(ss);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[1][t.column_index("stability")], "unstable");
  EXPECT_EQ(t.numeric("n_r")[2], fps[2].state.n_r);
  EXPECT_EQ(t.numeric("ev_re2")[1], fps[1].eigenvalues[2].real());
}

TEST(Run, FixedPointsManifest) {
  const auto m = run_manifest(parse_config(kMinimal, Protocol::fixed_points), "fp");
  const auto& list = m["derived"]["fixed_points"];
  ASSERT_EQ(list.size(), 3u);
  int stable = 0;
  for (const auto& f : list) stable += f["stability"] == "stable";
  EXPECT_EQ(stable, 2);
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["config"]["params"]["omega"], 0.7);
}

TEST(Run, DrivenIntegrateShowsSubharmonic) {
  const auto dir = scratch_dir("drive");
  auto c = parse_config(R"({"params": {"omega": 0.7, "delta0": 3.5, "vbar": -12},
                            "drive": {"kick_amplitude": -10.0}})",
                        Protocol::integrate);
  run(c, dir);
  std::ifstream f(dir / "result.csv");
  const auto ts = io::time_series_from_table(io::read_csv(f));
  EXPECT_GT(analyze_response(ts, 50.0, channels::kTransmission).report.dtc_order, 0.5);
}

TEST(Run, OracleCheckWithinTolerance) {
  const auto m = run_manifest(
      parse_config(R"({"params": {"omega": 1, "delta0": 0, "vbar": 0}, "integrate": {"t1": 200}})",
                   Protocol::oracle_check),
      "oracle");
  EXPECT_LT(m["derived"]["max_sup_norm"].get<double>(), 1e-7);
}

TEST(Run, DeterministicOutputs) {
  const auto c = parse_config(R"({"params": {"omega": 0.7, "delta0": 3.5, "vbar": -12},
                                  "basin": {"nh": 9, "nv": 9}})",
                              Protocol::basin);
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  run(c, a);
  run(c, b);
  EXPECT_EQ(slurp(a / "result.csv"), slurp(b / "result.csv"));
  EXPECT_EQ(slurp(a / "fixed_points.csv"), slurp(b / "fixed_points.csv"));
  EXPECT_FALSE(slurp(a / "result.csv").empty());
}

TEST(Run, ModuleErrorsPropagate) {
  const auto c = parse_config(R"({"params": {"omega": 0.5, "delta0": 0, "vbar": 0}})", Protocol::basin);
  EXPECT_THROW(run(c, scratch_dir("mono")), ValidationError);
}
