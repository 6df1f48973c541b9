#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpath/io/cli.hpp"

using dpath::io::Json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  Json json() const { return Json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dpath");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream os;
  Run r;
  r.code = dpath::io::run(static_cast<int>(argv.size()), argv.data(), os);
  r.out = os.str();
  return r;
}

std::string temp_config(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("dpath_test_" + name + ".json");
  std::ofstream(path) << body;
  return path.string();
}

bool has_warning(const Json& env, const std::string& code) {
  for (const auto& w : env["warnings"])
    if (w["code"] == code) return true;
  return false;
}

}  // namespace

TEST(Cli, PatternsJson) {
  const auto r = cli({"patterns", "--n", "2", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = r.json();
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["result"]["count"], 2);
  EXPECT_EQ(j["result"]["patterns"][0], "(1,2,1)");
  EXPECT_EQ(j["result"]["patterns"][1], "(2,1,2)");
}

TEST(Cli, PatternsCsv) {
  const auto r = cli({"--format", "csv", "patterns", "--n", "1", "--k", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 14), "index,pattern\n");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, DimOneWaveSeries) {
  const auto r = cli({"series", "dim1-wave", "--t", "1"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(r.json()["result"]["value"].get<double>(), 13.3900949316191, 1e-10);
}

TEST(Cli, GridTotalMatchesBessel) {
  const auto r = cli({"--max-len", "30", "total", "--preset", "grid", "--dim", "2", "--p", "0,0", "--q", "1,1", "--t", "2"});
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = r.json();
  const double ref = 2.0 * (boost::math::cyl_bessel_i(0, 2.0) + boost::math::cyl_bessel_i(1, 2.0));
  EXPECT_NEAR(j["result"]["total"].get<double>(), ref, 1e-8);
  EXPECT_FALSE(j["per_length"].empty());
  EXPECT_TRUE(j["tail"].contains("bound"));
  EXPECT_EQ(j["job"]["truncation"]["max_len"], 30);
  EXPECT_FALSE(j.contains("wall_time_s"));
}

TEST(Cli, TimingAddsWallTime) {
  const auto r = cli({"--timing", "series", "dim2", "--x", "0.5", "--y", "0.5"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.json().contains("wall_time_s"));
}

TEST(Cli, UnknownConfigKeyIsValidationError) {
  const auto path = temp_config("unknown", R"({"command": "total", "bogus": 1})");
  const auto r = cli({"--config", path, "total"});
  EXPECT_EQ(r.code, 1);
  const auto j = r.json();
  EXPECT_EQ(j["status"], "error");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("bogus"), std::string::npos);
}

TEST(Cli, ConfigCommandMustMatch) {
  const auto path = temp_config("mismatch", R"({"command": "wave"})");
  EXPECT_EQ(cli({"--config", path, "total"}).code, 1);
}

TEST(Cli, StochasticJobsNeedASeed) {
  EXPECT_EQ(cli({"volume", "--preset", "two_speed", "--p", "0", "--q", "0.3", "--t", "1", "--pattern", "1,2,1",
                 "--mc-samples", "100"})
                .code,
            1);
  EXPECT_EQ(cli({"verify"}).code, 1);
}

TEST(Cli, BadFlagValues) {
  EXPECT_EQ(cli({"total", "--preset", "grid", "--dim", "2", "--p", "0,0", "--q", "1,1", "--t", "-1"}).code, 1);
  EXPECT_EQ(cli({"--format", "xml", "series", "dim2"}).code, 1);
  EXPECT_EQ(cli({"series"}).code, 1);
}

TEST(Cli, BudgetExceededIsComputationError) {
  const auto path = temp_config("budget", R"({"truncation": {"max_len": 14, "pattern_budget": 100}})");
  const auto r = cli({"--config", path, "total", "--preset", "grid", "--dim", "3", "--p", "0,0,0", "--q", "1,1,1", "--t", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.json()["error"]["kind"], "resource-limit");
}

TEST(Cli, ReachCsvHeader) {
  const auto r = cli({"--max-len", "4", "reach", "--preset", "grid", "--dim", "2", "--t", "1", "--lo", "-1,-1", "--hi", "2,2",
                      "--cells", "30,30", "--from", "0.1,0.1"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,x1,x2,tag");
  EXPECT_NE(r.out.find("influenced"), std::string::npos);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::vector<std::string> job{"total", "--preset", "grid", "--dim", "3", "--p", "0,0,0", "--q", "0.4,0.5,0.3", "--t", "1.2"};
  auto with = [&](const std::string& th) {
    std::vector<std::string> a{"--threads", th, "--max-len", "8"};
    a.insert(a.end(), job.begin(), job.end());
    return cli(a);
  };
  const auto a = with("1"), b = with("4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, WarningsForBoundaryCases) {
  // one-direction arrival on the line
  auto r = cli({"total", "--preset", "two_speed", "--p", "0", "--q", "1", "--t", "1"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(has_warning(r.json(), "direct-influence"));
  // three fields on the line: positive-dimensional bases
  const auto path = temp_config("k3", R"({"system": {"fields": [[1.0], [-1.0], [0.5]]}})");
  r = cli({"--config", path, "--max-len", "5", "total", "--p", "0", "--q", "0.3", "--t", "1"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(has_warning(r.json(), "positive-dimensional-base"));
  // torus with a time no lift can use
  r = cli({"total", "--preset", "grid", "--dim", "2", "--topology", "torus", "--p", "0,0", "--q", "0.3,0.6", "--t", "0.5"});
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(has_warning(r.json(), "empty-torus"));
}

TEST(Cli, VerifySeedIsRequiredAndDeterministic) {
  const auto a = cli({"--threads", "2", "verify", "--seed", "3", "--mc-samples", "2000"});
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.json()["status"], "ok");
  EXPECT_TRUE(has_warning(a.json(), "discrepancy"));
}

TEST(Cli, EverySampleRuns) {
  std::size_t seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(DPATH_SAMPLES_DIR)) {
    if (e.path().extension() != ".json") continue;
    const Json cfg = Json::parse(std::ifstream(e.path()));
    const auto r = cli({"--config", e.path().string(), cfg["command"].get<std::string>()});
    EXPECT_EQ(r.code, 0) << e.path() << "\n" << r.out;
    ++seen;
  }
  EXPECT_GE(seen, 5u);
}
