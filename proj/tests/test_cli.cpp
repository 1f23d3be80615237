#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "localparts/app.hpp"
#include "localparts/spacetime.hpp"

using namespace localparts;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("localparts-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const { return (leaf.empty() ? path_ : path_ / leaf).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, TimingEquivalentSpeed) {
  const Result r = call({"timing", "--v", "1e5c"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["v_bb"].get<double>(), kSpeedOfLight / 1e5, 1e-9);
  EXPECT_EQ(j["units"], "si");
}

TEST(Cli, TimingCriteriaWithAllInputs) {
  const Result r = call({"timing", "--c-units", "--L", "10", "--dt", "0.5", "--v", "100", "--v-bb", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["before_before"], false);     // 0.5 < 0.01 * 10 fails
  EXPECT_EQ(j["finite_speed_cut"], false);  // 10 > 100 * 0.5 fails
  EXPECT_EQ(j["equivalence"]["agrees_with_finite_speed_cut"], true);
}

TEST(Cli, ChainLocalBound) {
  const Result r = call({"chain", "--n", "4", "--local-bound"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["local_bound"], 6.0);
  EXPECT_FALSE(j.contains("quantum"));
}

TEST(Cli, ChainMixture) {
  const Result r = call({"chain", "--n", "2", "--p", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["mixture"]["deviation"].get<double>(), 0.5 * (2.0 * std::sqrt(2.0) - 2.0), 1e-6);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"chain"}).code, 2);
  EXPECT_EQ(call({"chain", "--n", "1"}).code, 2);
  EXPECT_EQ(call({"chsh", "--trials", "0"}).code, 2);
  const Result r = call({"preset", "run", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "usage");
}

TEST(Cli, OutOfRangeFlagIsUsageError) {
  const Result r = call({"timing", "--c-units", "--L", "1", "--dt", "0", "--v-bb", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "usage");
}

TEST(Cli, RuntimeErrorsExitOne) {
  // The output directory cannot be created below a regular file.
  TempDir dir;
  std::ofstream(dir.path() / "plain") << "x";
  const Result r = call({"chain", "--n", "3", "--local-bound", "--out", dir.str("plain/sub")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "runtime");
}

TEST(Cli, HelpExitsZero) {
  const Result r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("timing"), std::string::npos);
}

TEST(Cli, ValidateReportsAllIssues) {
  TempDir dir;
  {
    std::ofstream os(dir.path() / "bad.json");
    os << R"({"schema": "localparts.scenario/1", "trials": 0,
              "geometry": {"devices": [{"x": 0}, {"x": 1, "beta": 1.2}]}})";
  }
  const Result r = call({"validate", dir.str("bad.json")});
  EXPECT_EQ(r.code, 2);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"]["kind"], "schema");
  ASSERT_EQ(e["error"]["issues"].size(), 2u);
  EXPECT_EQ(e["error"]["issues"][0]["path"], "/geometry/devices/1/beta");
  EXPECT_EQ(e["error"]["issues"][1]["path"], "/trials");

  {
    std::ofstream os(dir.path() / "good.json");
    os << R"({"schema": "localparts.scenario/1", "units": "c", "timing": {"L": 2, "dt": 0, "v": "10c"}})";
  }
  EXPECT_EQ(call({"validate", dir.str("good.json")}).code, 0);
  EXPECT_EQ(call({"timing", "--scenario", dir.str("good.json")}).code, 0);

  {
    std::ofstream os(dir.path() / "broken.json");
    os << "{ not json";
  }
  EXPECT_EQ(call({"validate", dir.str("broken.json")}).code, 2);
  EXPECT_EQ(call({"validate", dir.str("missing.json")}).code, 2);
}

TEST(Cli, PresetListNamesEveryPreset) {
  const Result r = call({"preset", "list"});
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  std::vector<std::string> names;
  for (const auto& p : j["presets"]) names.push_back(p["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"fig1-detection", "fig2a", "fig2b", "before-before",
                                             "finite-speed-1e5c", "mixture-chain"}));
}

TEST(Cli, PresetOutputIsDeterministic) {
  TempDir a, b;
  ASSERT_EQ(call({"preset", "run", "fig2b", "--trials", "5000", "--out", a.str(), "--workers", "1"}).code, 0);
  ASSERT_EQ(call({"preset", "run", "fig2b", "--trials", "5000", "--out", b.str(), "--workers", "4"}).code, 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b.path() / entry.path().filename())) << entry.path();
  }
  EXPECT_GE(files, 3);
  const Json report = Json::parse(slurp(a.path() / "report.json"));
  EXPECT_NEAR(report["signaling_distance"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, SimulateCsvToStdout) {
  TempDir dir;
  {
    std::ofstream os(dir.path() / "s.json");
    os << R"({"schema": "localparts.scenario/1", "units": "c",
              "geometry": {"devices": [{"x": -1, "beta": -0.1}, {"x": 1, "beta": 0.1}]},
              "model": {"kind": "multisim"}, "state": "singlet",
              "settings": [[0, 1.5707963267948966], [0.7853981633974483, -0.7853981633974483]],
              "trials": 10, "seed": 3})";
  }
  const Result r = call({"simulate", "--scenario", dir.str("s.json"), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "trial,x,y,z,a,b,c,coord_ab,coord_ac,coord_bc");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_NE(line.find(",OFF,,"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 10);
}

TEST(Cli, PointDFromEvents) {
  const Result r = call({"point-d", "--c-units", "--event-a", "0,0", "--event-b", "0,10", "--event-c", "0,20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["found"], true);
  EXPECT_EQ(j["advantage"], 10.0);
  EXPECT_EQ(j["checks"]["outside_future_of_a"], true);
}

TEST(Cli, SimulateReportsChainValue) {
  const Result r = call({"simulate", "--scenario", std::string(LOCALPARTS_SCENARIO_DIR) + "/chain-mixture.json",
                         "--trials", "50000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json chain = Json::parse(r.out)["statistics"]["chain"];
  // 0.9 * 8 cos(pi/8) + 0.1 * 6 for the equally spaced angles.
  const double predicted = 0.9 * 8.0 * std::cos(std::numbers::pi / 8.0) + 0.1 * 6.0;
  EXPECT_NEAR(chain["predicted"].get<double>(), predicted, 1e-12);
  const double sigma = chain["empirical"]["std_error"].get<double>();
  EXPECT_LT(std::abs(chain["empirical"]["value"].get<double>() - predicted), 5.0 * sigma);
}
