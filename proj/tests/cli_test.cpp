#include "cli/commands.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cilp::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cilp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const json& cfg, const std::string& name = "config.json") {
    const auto path = dir_ / name;
    std::ofstream(path) << cfg.dump(2);
    return path.string();
  }

  int run_cmd(const std::string& cmd, const json& cfg, Overrides o = {}) {
    if (!o.out_dir) o.out_dir = (dir_ / "out").string();
    log_.str("");
    return run(cmd, write_config(cfg), o, log_);
  }

  json read_json(const std::string& name) {
    std::ifstream in(dir_ / "out" / name);
    return json::parse(in);
  }

  std::string read_text(const std::string& name) {
    std::ifstream in(dir_ / "out" / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream log_;
};

json mm1_config() {
  return json::parse(R"({
    "schema_version": 1,
    "model": {"setting": "ct_stationary", "family": "mm1", "params": {"lambda": 1, "mu": 2}},
    "weight": {"degree": 3},
    "c": "closed-form",
    "schedule": [1000, 8000, 27000],
    "objectives": [{"kind": "monomial", "degree": 1}]
  })");
}

json walk_config() {
  return json::parse(R"({
    "schema_version": 1,
    "model": {"setting": "dt_exit", "family": "random_walk", "params": {"p_up": 0.25, "start": 3},
              "domain": {"from": 1}},
    "weight": {"degree": 2},
    "c": "closed-form",
    "schedule": [144, 324],
    "scheme": "B",
    "image": {"outputs": [0]}
  })");
}

TEST(ParseConfig, SyntaxErrorReportsLineAndColumn) {
  try {
    parse_config("{\n  \"schema_version\": 1,\n  \"model\": {,\n}");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, ErrorsNameTheFieldPath) {
  auto cfg = mm1_config();
  cfg["model"]["params"]["lambda"] = -1;
  try {
    build_model(parse_config(cfg.dump()));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.params.lambda"), std::string::npos) << e.what();
  }
  cfg = mm1_config();
  cfg["solver"] = {{"workrs", 2}};
  EXPECT_THROW(parse_config(cfg.dump()), ConfigError);
  cfg = mm1_config();
  cfg["schedule"] = {10, 10};
  try {
    parse_config(cfg.dump());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("schedule[1]"), std::string::npos);
  }
}

TEST(ParseConfig, SchemaVersionIsRequiredAndChecked) {
  auto cfg = mm1_config();
  cfg.erase("schema_version");
  EXPECT_THROW(parse_config(cfg.dump()), ConfigError);
  cfg["schema_version"] = 2;
  EXPECT_THROW(parse_config(cfg.dump()), ConfigError);
}

TEST(ParseConfig, ObjectiveOutsideWeightedSpaceIsRejected) {
  auto cfg = mm1_config();
  cfg["objectives"] = json::array({{{"kind", "monomial"}, {"degree", 3}}});
  try {
    parse_config(cfg.dump());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("not in W"), std::string::npos);
  }
}

TEST(BuildModel, ClosedFormMomentBounds) {
  EXPECT_DOUBLE_EQ(build_model(parse_config(mm1_config().dump())).c, 13.0);
  EXPECT_NEAR(build_model(parse_config(walk_config().dump())).c, 46.0, 1e-12);
  auto cfg = mm1_config();
  cfg["weight"]["degree"] = 2.5;
  cfg["objectives"] = json::array();
  EXPECT_THROW(build_model(parse_config(cfg.dump())), ConfigError);
}

TEST(BuildModel, SettingMustMatchTheFamilyClock) {
  auto cfg = mm1_config();
  cfg["model"]["setting"] = "dt_stationary";
  cfg["c"] = 13;
  EXPECT_THROW(build_model(parse_config(cfg.dump())), ConfigError);
}

TEST(ApplyOverrides, WorkerCountFallsBackToEnvironment) {
  auto cfg = parse_config(mm1_config().dump());
  ::setenv("CILP_WORKERS", "3", 1);
  apply(cfg, {});
  ::unsetenv("CILP_WORKERS");
  EXPECT_EQ(cfg.workers, 3u);
  Overrides o;
  o.workers = 2;
  auto cfg2 = parse_config(mm1_config().dump());
  apply(cfg2, o);
  EXPECT_EQ(cfg2.workers, 2u);
}

TEST_F(CliTest, ValidateWritesAReport) {
  EXPECT_EQ(run_cmd("validate", mm1_config()), kOk) << log_.str();
  auto doc = read_json("validate.json");
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_TRUE(doc["ok"].get<bool>());
  EXPECT_FALSE(doc["checks"].empty());
}

TEST_F(CliTest, InvalidConfigExitsWithConfigCode) {
  auto cfg = mm1_config();
  cfg["model"]["params"]["mu"] = 0;
  EXPECT_EQ(run_cmd("validate", cfg), kConfigError);
  EXPECT_NE(log_.str().find("model.params.mu"), std::string::npos) << log_.str();
}

TEST_F(CliTest, ModelErrorExitsWithModelCode) {
  auto cfg = json::parse(R"({
    "schema_version": 1,
    "model": {"setting": "dt_stationary", "family": "finite", "params": {"matrix": [[0.5, 0.5], [0.3, 0.6]]}},
    "c": 2, "r": 10, "objectives": [{"kind": "mass"}]
  })");
  EXPECT_EQ(run_cmd("bound", cfg), kModelError);
  EXPECT_NE(log_.str().find("witness: 1"), std::string::npos) << log_.str();
}

TEST_F(CliTest, InfeasibleRowsAreRecordedAndExitWithSolverCode) {
  auto cfg = walk_config();
  cfg["c"] = 10;
  cfg["scheme"] = "A";
  cfg["objectives"] = json::array({{{"kind", "mass"}}});
  EXPECT_EQ(run_cmd("sweep", cfg), kSolverError);
  auto doc = read_json("sweep.json");
  ASSERT_EQ(doc["records"].size(), 2u);
  EXPECT_NE(doc["records"][0]["error"].get<std::string>().find("infeasible"), std::string::npos);
}

TEST_F(CliTest, SweepGapShrinksAndOutputRoundTrips) {
  EXPECT_EQ(run_cmd("sweep", mm1_config()), kOk) << log_.str();
  auto doc = read_json("sweep.json");
  EXPECT_EQ(doc["command"], "sweep");
  double prev = INFINITY;
  for (const auto& rec : doc["records"]) {
    EXPECT_LT(rec["gap"].get<double>(), prev);
    EXPECT_LE(rec["l_corrected"].get<double>(), 1.0);
    EXPECT_GE(rec["u_corrected"].get<double>(), 1.0);
    prev = rec["gap"].get<double>();
  }
  // Doubles survive a dump/parse cycle exactly.
  EXPECT_EQ(json::parse(doc.dump()), doc);
  const auto csv = read_text("sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("objective,r,window_size", 0), 0u);
}

TEST_F(CliTest, FiniteChainGapVanishesAtSaturation) {
  auto cfg = json::parse(R"({
    "schema_version": 1,
    "model": {"setting": "ct_stationary", "family": "finite",
              "params": {"matrix": [[0, 2, 1], [1, 0, 3], [4, 1, 0]]}},
    "c": 2, "r": 10000000000,
    "objectives": [{"kind": "indicator", "state": 0}]
  })");
  EXPECT_EQ(run_cmd("bound", cfg), kOk) << log_.str();
  auto rec = read_json("bound.json")["records"][0];
  EXPECT_LE(rec["gap"].get<double>(), 1e-9);
  EXPECT_NEAR(rec["midpoint"].get<double>(), 17.0 / 38.0, 1e-9);
}

TEST_F(CliTest, EnvelopeFreeObjectiveGivesOneSidedRecord) {
  auto cfg = mm1_config();
  cfg["objectives"] = json::array({{{"kind", "monomial"}, {"degree", 1}, {"envelope", false}}});
  EXPECT_EQ(run_cmd("bound", cfg), kOk);
  auto rec = read_json("bound.json")["records"][0];
  EXPECT_TRUE(rec["one_sided"].get<bool>());
  EXPECT_TRUE(rec["u_corrected"].is_null());
  EXPECT_TRUE(rec["gap"].is_null());
  EXPECT_TRUE(rec["l_corrected"].is_number());
  cfg["solver"] = {{"require_two_sided", true}};
  EXPECT_EQ(run_cmd("bound", cfg), kConfigError);
  EXPECT_TRUE(read_json("bound.json")["records"][0].contains("error"));
}

TEST_F(CliTest, MinimalRefusesUnassertedStationaryModel) {
  auto cfg = mm1_config();
  cfg["scheme"] = "B";
  EXPECT_EQ(run_cmd("minimal", cfg), kConfigError);
  EXPECT_NE(log_.str().find("minimal point"), std::string::npos) << log_.str();
  cfg["model"]["unique_stationary"] = true;
  EXPECT_EQ(run_cmd("minimal", cfg), kOk) << log_.str();
}

TEST_F(CliTest, MinimalOnBiasedWalkWithImageAndSimulation) {
  auto cfg = walk_config();
  cfg["monte_carlo"] = {{"paths", 2000}, {"seed", 5}};
  Overrides o;
  o.workers = 2;
  EXPECT_EQ(run_cmd("minimal", cfg, o), kOk) << log_.str();
  auto doc = read_json("minimal.json");
  EXPECT_EQ(doc["workers"], 2);
  ASSERT_EQ(doc["runs"].size(), 2u);
  const double g0 = doc["runs"][0]["gamma"], g1 = doc["runs"][1]["gamma"];
  EXPECT_LT(g1, g0);
  const double i0 = doc["runs"][0]["image"]["lower"][0][1], i1 = doc["runs"][1]["image"]["lower"][0][1];
  EXPECT_LT(i0, i1);
  EXPECT_EQ(doc["monte_carlo"]["seed"], 5);
  EXPECT_EQ(doc["monte_carlo"]["paths"], 2000);
}

TEST_F(CliTest, NumericOutputIsIndependentOfWorkersAndReproducible) {
  Overrides one, three;
  one.workers = 1;
  three.workers = 3;
  one.no_timing = three.no_timing = true;
  ASSERT_EQ(run_cmd("sweep", mm1_config(), one), kOk);
  const auto a = read_text("sweep.csv");
  auto ja = read_json("sweep.json");
  ASSERT_EQ(run_cmd("sweep", mm1_config(), three), kOk);
  const auto b = read_text("sweep.csv");
  auto jb = read_json("sweep.json");
  EXPECT_EQ(a, b);
  EXPECT_EQ(ja["records"], jb["records"]);
  ASSERT_EQ(run_cmd("sweep", mm1_config(), one), kOk);
  EXPECT_EQ(read_json("sweep.json").dump(), ja.dump());
}

TEST_F(CliTest, LpDumpFilesParseBack) {
  auto cfg = mm1_config();
  cfg["r"] = 100;
  cfg["output"] = {{"lp_dump", true}};
  ASSERT_EQ(run_cmd("bound", cfg), kOk);
  std::ifstream in(dir_ / "out" / "lp" / "obj0_r100_min.lp");
  ASSERT_TRUE(in);
  auto lp = read_lp_dump(in);
  EXPECT_EQ(lp.n_vars, 5u);
  EXPECT_EQ(lp.sense, Sense::minimize);
}

}  // namespace
}  // namespace cilp::cli
