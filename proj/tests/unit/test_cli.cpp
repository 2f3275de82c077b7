#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "concentration/cli.hpp"

namespace fs = std::filesystem;
using concentration::cli::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "concentration_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = concentration::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(CONCENTRATION_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("concentration-cli-" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& body) { std::ofstream(p) << body; }

}  // namespace

TEST(Cli, NormsOfExponential) {
  const auto r = run({"norms", "--spec", config("exp1.json"), "--alpha", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["result"]["value"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(j["tool"], "concentration");
  EXPECT_EQ(j["version"], CONCENTRATION_VERSION);
  EXPECT_EQ(j["config_digest"].get<std::string>().size(), 16u);
  EXPECT_EQ(j["seed"], 0);
}

TEST(Cli, SchemaViolationsNameThePath) {
  TempDir dir;
  write(dir / "bad.json", R"({"schema":1,"bogus":2})");
  auto r = run({"norms", "--spec", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/bogus"), std::string::npos) << r.err;

  write(dir / "nested.json", R"({"schema":1,"function":{"kind":"sum","n":3,"iid":{"kind":"exponential","rat":1}},"t_grid":"1:2:2"})");
  r = run({"verify", "--spec", (dir / "nested.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/function/iid/rat"), std::string::npos) << r.err;

  write(dir / "noschema.json", R"({"distribution":{"kind":"rademacher"}})");
  r = run({"norms", "--spec", (dir / "noschema.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/schema"), std::string::npos);

  r = run({"norms", "--spec", (dir / "missing.json").string()});
  EXPECT_EQ(r.code, 1);
  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  r = run({"verify", "--spec", config("sum_exp10.json"), "--t-grid", "3:1:4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/t_grid"), std::string::npos);
}

TEST(Cli, VerifyIsByteIdenticalAcrossRunsAndThreads) {
  TempDir dir;
  for (const char* fmt : {"csv", "json"}) {
    const auto a = run({"verify", "--spec", config("sum_exp10.json"), "--n", "50000", "--format", fmt, "--threads", "1"});
    const auto b = run({"verify", "--spec", config("sum_exp10.json"), "--n", "50000", "--format", fmt, "--threads", "8"});
    const auto c = run({"verify", "--spec", config("sum_exp10.json"), "--n", "50000", "--format", fmt, "--threads", "1",
                        "--output", (dir / "out").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, slurp(dir / "out"));
    EXPECT_EQ(c.out, "");
  }
  for (const auto& e : fs::directory_iterator(dir.path())) EXPECT_EQ(e.path().filename(), "out");
}

TEST(Cli, CsvGoldenFile) {
  const auto r = run({"verify", "--spec", config("sum_exp10.json"), "--n", "20000", "--t-grid", "1:9:5", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(std::string(CONCENTRATION_GOLDEN_DIR) + "/verify_sum_exp10.csv"));
}

TEST(Cli, DigestTracksConfigButNotPlumbing) {
  auto digest = [](std::vector<std::string> extra) {
    std::vector<std::string> args{"norms", "--spec", config("exp1.json")};
    args.insert(args.end(), extra.begin(), extra.end());
    return json::parse(run(args).out)["config_digest"].get<std::string>();
  };
  const auto base = digest({});
  EXPECT_EQ(base, digest({"--threads", "4"}));
  EXPECT_NE(base, digest({"--seed", "1"}));
  EXPECT_NE(base, digest({"--set", "distribution.rate=2"}));
}

TEST(Cli, NegativeControlExitCode) {
  const auto r = run({"verify", "--spec", config("negative_control.json"), "--n", "50000", "--set",
                      "negative_control_factor=0.01", "--format", "csv"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.out.find("thm2-negative-control"), std::string::npos);
  EXPECT_NE(r.out.find("VIOLATION"), std::string::npos);
}

TEST(Cli, ExactVerificationFromTable) {
  const auto r = run({"compare", "--spec", config("table_small.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["report"]["exact"].get<bool>());
  EXPECT_EQ(j["report"]["verdict"], "SOUND");
  EXPECT_EQ(j["report"]["bounds"].size(), 4u);
}

TEST(Cli, BoundAndInvert) {
  TempDir dir;
  write(dir / "prof.json", R"({"schema":1,"profile":{"psi1":[1,1]},"bounds":["thm2"],"t_grid":[3]})");
  auto r = run({"bound", "--spec", (dir / "prof.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_NEAR(j["results"][0]["tails"][0]["prob"].get<double>(), 0.8875163309381428, 1e-14);
  r = run({"invert", "--spec", (dir / "prof.json").string(), "--delta", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_NEAR(j["results"][0]["t_exact"].get<double>(), 23.74444658349877, 1e-10);
  r = run({"invert", "--spec", (dir / "prof.json").string()});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, Appbound) {
  auto r = run({"appbound", "--spec", config("regression.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["result"]["application"], "regression");
  EXPECT_GT(j["result"]["bound"].get<double>(), j["result"]["rademacher_bound"].get<double>());
  r = run({"appbound", "--spec", config("regression.json"), "--n", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("n >= ln(1/delta)"), std::string::npos) << r.err;
  r = run({"appbound", "--set", R"(application={"kind":"vector_iii","l2p":1,"psi1":1,"p":2,"n":10})", "--delta", "0.7"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("delta <= 1/2"), std::string::npos) << r.err;
  r = run({"appbound", "--set", R"(application={"kind":"metric","L":1,"diameters":[1,1]})", "--t-grid", "1:3:3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["result"]["tails"].size(), 3u);
}

TEST(Cli, EntropyCheck) {
  auto r = run({"entropy-check", "--set", R"(table={"coords":[{"values":[0,1],"probs":[0.5,0.5]},{"values":[0,1],"probs":[0.5,0.5]}],"f":[0,0,0,1]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["subadditivity"].size(), 3u);
  r = run({"entropy-check", "--set", R"(finite={"values":[-0.1,0.1],"probs":[0.5,0.5]})"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["subexponential"]["holds"].get<bool>());
  EXPECT_EQ(j["verdict"], "SOUND");
}

TEST(Cli, CsvOnlyForReports) {
  const auto r = run({"norms", "--spec", config("exp1.json"), "--format", "csv"});
  EXPECT_EQ(r.code, 1);
}
