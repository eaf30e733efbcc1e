#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "kaclab/cli.hpp"

using namespace kaclab;
namespace fs = std::filesystem;

namespace {
const fs::path kConfigs = KACLAB_CONFIG_DIR;

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("kaclab_test_" + name);
  fs::remove_all(p);
  return p;
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

RunConfig small_indicator() {
  RunConfig c = preset("indicator-gevrey");
  c.grid = GridSpec{16.0, 128, 6.0};
  c.quad_tol = 1e-8;
  c.integrator.T = 0.2;
  c.integrator.dt = 0.02;
  c.integrator.outputs = 5;
  return c;
}
}  // namespace

TEST(Config, RoundTrip) {
  RunConfig c;
  c.seed = 7;
  c.kernel.s = 0.3;
  c.grid.n = 130;
  c.initial.profile = "two_bump";
  c.initial.centers = {-2.0, 0.5};
  c.diagnostics.deltas = {0.3, 1e-7};
  c.probe.ids = {"symbol", "coercivity"};
  c.reduce3d.shape = Kernel3DShape::sine_power;
  std::string a = emit_ini(c);
  RunConfig back = parse_ini(a);
  EXPECT_EQ(emit_ini(back), a);
  RunConfig from_json = parse_json(emit_json(c).dump());
  EXPECT_EQ(emit_ini(from_json), a);
}

TEST(Config, SampleFilesMatchPresets) {
  EXPECT_EQ(emit_ini(load_config(kConfigs / "indicator-gevrey.ini")), emit_ini(preset("indicator-gevrey")));
  EXPECT_EQ(emit_ini(load_config(kConfigs / "indicator-gevrey.json")), emit_ini(preset("indicator-gevrey")));
  EXPECT_EQ(emit_ini(load_config(kConfigs / "maxwellian-sanity.ini")), emit_ini(preset("maxwellian-sanity")));
}

TEST(Config, Rejections) {
  expect_code(ErrorCode::ConfigError, [] { parse_ini("[kernel]\nsharpness = 3\n"); });
  expect_code(ErrorCode::ConfigError, [] { parse_ini("[grid]\nn = many\n"); });
  expect_code(ErrorCode::ConfigError, [] { preset("nonexistent"); });
  expect_code(ErrorCode::ParseError, [] { parse_json("{\"kernel\": [1, 2"); });
  RunConfig c;
  c.kernel.s = 1.5;
  expect_code(ErrorCode::ConfigError, [&] { validate(c); });
  c = RunConfig{};
  c.kernel.s = 0.6;
  c.probe.ids = {"commutator"};
  expect_code(ErrorCode::UnsupportedRegime, [&] { check_regime(c); });
}

TEST(Csv, ErrorsCarryLineNumbers) {
  try {
    parse_radial_csv("r,g\n0,1\n0.5,1\n\n0.25,1\n", "prof.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("prof.csv:5"), std::string::npos) << e.what();
  }
  try {
    parse_csv("a,b\n1,2\n3,x\n", "t.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("t.csv:3"), std::string::npos) << e.what();
  }
  expect_code(ErrorCode::ParseError, [] { parse_radial_csv("r,h\n0,1\n"); });
  expect_code(ErrorCode::ParseError, [] { parse_csv("a,b\n1\n"); });
}

TEST(Csv, NumbersRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    double y;
    ASSERT_TRUE(parse_double(format_double(x), y));
    EXPECT_EQ(x, y);
  }
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::ParseError), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::StiffnessError), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::AccuracyNotReached), 3);
}

TEST(Commands, SimulateWritesManifest) {
  auto dir = fresh_dir("simulate");
  EXPECT_EQ(run_simulate(small_indicator(), dir), kExitOk);
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  ASSERT_FALSE(manifest["files"].empty());
  size_t listed = 0;
  for (const auto& f : manifest["files"]) {
    auto content = read_file(dir / f["path"].get<std::string>());
    EXPECT_EQ(sha256_hex(content), f["sha256"].get<std::string>());
    ++listed;
  }
  size_t on_disk = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") ++on_disk;
  EXPECT_EQ(listed, on_disk);
  auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  EXPECT_LT(summary["mass_drift"].get<double>(), 1e-12);
  EXPECT_TRUE(fs::exists(dir / "gevrey_fit.csv"));
  EXPECT_TRUE(fs::exists(dir / "snapshots/snapshot_004.csv"));

  // The snapshots feed the standalone diagnostic and reproduce the fit.
  auto diag = fresh_dir("diag");
  EXPECT_EQ(run_diag_gevrey(small_indicator(), dir.string(), diag), kExitOk);
  auto g = nlohmann::json::parse(read_file(diag / "gevrey.json"));
  EXPECT_NEAR(g["c0"].get<double>(), summary["gevrey"]["c0"].get<double>(),
              1e-9 * std::abs(summary["gevrey"]["c0"].get<double>()));
}

TEST(Commands, ThreadCountDoesNotChangeOutputs) {
  auto a = fresh_dir("threads1"), b = fresh_dir("threads4");
  set_thread_count(1);
  ASSERT_EQ(run_simulate(small_indicator(), a), kExitOk);
  set_thread_count(4);
  ASSERT_EQ(run_simulate(small_indicator(), b), kExitOk);
  set_thread_count(0);
  EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));
}

TEST(Commands, ProbeExitCodes) {
  RunConfig c;
  expect_code(ErrorCode::ConfigError, [&] { run_probe(c, {}, fresh_dir("probe_empty")); });
  expect_code(ErrorCode::ConfigError, [&] { run_probe(c, {"no_such_probe"}, fresh_dir("probe_bad")); });
  c.probe.symbol_samples = 500;
  auto dir = fresh_dir("probe_symbol");
  EXPECT_EQ(run_probe(c, {"symbol_bounds"}, dir), kExitOk);
  auto rep = nlohmann::json::parse(read_file(dir / "probes/symbol_bounds.json"));
  EXPECT_TRUE(rep["passed"].get<bool>());
  c.kernel.s = 0.6;
  expect_code(ErrorCode::UnsupportedRegime, [&] { run_probe(c, {"commutator"}, fresh_dir("probe_regime")); });
}

TEST(Commands, Reduce3dBall) {
  RunConfig c = load_config(kConfigs / "reduce3d-ball.ini");
  auto dir = fresh_dir("reduce_ball");
  EXPECT_EQ(run_reduce3d(c, (kConfigs / "radial_ball.csv").string(), dir), kExitOk);
  auto rep = nlohmann::json::parse(read_file(dir / "report.json"));
  EXPECT_LT(rep["moments"]["mass_relative_error"].get<double>(), 1e-8);
  EXPECT_LT(rep["moments"]["energy_relative_error"].get<double>(), 1e-8);
  EXPECT_FALSE(rep.contains("consistency"));
  auto tab = parse_csv(read_file(dir / "projected.csv"));
  ASSERT_EQ(tab.rows.size(), 2001u);
  for (const auto& row : tab.rows) EXPECT_NEAR(row[1], kPi * std::max(1.0 - row[0] * row[0], 0.0), 1e-8);
}

TEST(Commands, Reduce3dMissingInput) {
  RunConfig c;
  expect_code(ErrorCode::ConfigError, [&] { run_reduce3d(c, "", fresh_dir("reduce_none")); });
  expect_code(ErrorCode::IoError, [&] { run_reduce3d(c, "/nonexistent/profile.csv", fresh_dir("reduce_missing")); });
}

TEST(Commands, ErrorRecord) {
  auto dir = fresh_dir("error");
  int code = report_error(Error(ErrorCode::ConfigError, "grid.n: bad"), dir);
  EXPECT_EQ(code, 2);
  auto j = nlohmann::json::parse(read_file(dir / "error.json"));
  EXPECT_EQ(j["error"], "ConfigError");
  EXPECT_EQ(j["exit_code"], 2);
}
