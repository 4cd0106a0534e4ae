#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hjlab/cli.hpp"
#include "hjlab/config.hpp"

using namespace hjlab;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) {
  return std::string(HJLAB_SOURCE_DIR) + "/configs/" + name;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hjlab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Json without_timestamp(const fs::path& p) {
  Json j = Json::parse(slurp(p));
  j.erase("timestamp");
  return j;
}

const std::vector<std::string> kSmallEstimate{"--set", "campaign.thetas=[0]",
                                              "--set", "campaign.times=[1,2,3]",
                                              "--set", "campaign.M=8"};

}  // namespace

TEST_CASE("verify on the transport example passes and writes its reports") {
  const fs::path dir = scratch("verify");
  const Run r = run({"verify", "--config", config_path("transport.json"), "--out", dir.string()});
  CHECK(r.code == cli::kExitPass);
  REQUIRE(fs::exists(dir / "verify.report.json"));
  REQUIRE(fs::exists(dir / "config.echo.json"));
  const Json rep = Json::parse(slurp(dir / "verify.report.json"));
  CHECK(rep.at("passed").get<bool>());
  CHECK(rep.contains("config_hash"));
  std::vector<std::string> names;
  for (const Json& c : rep.at("checks")) {
    names.push_back(c.at("name"));
    CHECK(c.at("passed").get<bool>());
  }
  for (const char* n : {"orientation", "bounds-H1-H3", "strip", "lipschitz", "comparison", "scaling"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("invalid parameters exit with a config error naming the field") {
  const fs::path dir = scratch("negative_range");
  const Run r = run({"verify", "--config", config_path("transport.json"), "--set", "environment.range=-1",
                     "--out", dir.string()});
  CHECK(r.code == cli::kExitConfigError);
  CHECK(r.err.find("environment.range") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({"frobnicate"}).code == cli::kExitConfigError);
  CHECK(run({"verify"}).code == cli::kExitConfigError);
  CHECK(run({"verify", "--config", "/nonexistent/config.json"}).code == cli::kExitConfigError);

  const Run bad_path = run({"verify", "--config", config_path("transport.json"), "--set", "solver.nope=1"});
  CHECK(bad_path.code == cli::kExitConfigError);
  CHECK(bad_path.err.find("solver.nope") != std::string::npos);

  const fs::path dir = scratch("unknown_key");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"solver": {"dtt": 0.1}})";
  const Run unknown = run({"verify", "--config", (dir / "c.json").string()});
  CHECK(unknown.code == cli::kExitConfigError);
  CHECK(unknown.err.find("solver.dtt") != std::string::npos);
}

TEST_CASE("estimate is reproducible across runs and worker counts") {
  std::vector<fs::path> dirs;
  for (const char* workers : {"1", "1", "5"}) {
    const fs::path dir = scratch(std::string("estimate_") + std::to_string(dirs.size()));
    std::vector<std::string> args{"estimate", "--config", config_path("transport.json"),
                                  "--workers", workers, "--out", dir.string()};
    args.insert(args.end(), kSmallEstimate.begin(), kSmallEstimate.end());
    REQUIRE(run(args).code == cli::kExitPass);
    dirs.push_back(dir);
  }
  const Json first = without_timestamp(dirs[0] / "utable.json");
  CHECK(first.dump() == without_timestamp(dirs[1] / "utable.json").dump());
  CHECK(first.dump() == without_timestamp(dirs[2] / "utable.json").dump());
  CHECK(slurp(dirs[0] / "samples.csv") == slurp(dirs[2] / "samples.csv"));
  CHECK(slurp(dirs[0] / "samples.csv").rfind("# config_hash=", 0) == 0);

  const Json echo = Json::parse(slurp(dirs[2] / "config.echo.json"));
  CHECK(echo.at("workers") == 5);
}

TEST_CASE("config hash ignores workers and output directory only") {
  Json a = apply_defaults(Json::parse(slurp(config_path("transport.json"))));
  Json b = a;
  b["campaign"]["workers"] = 7;
  b["output"]["directory"] = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b["campaign"]["M"] = 3;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("effective config round-trips") {
  for (const char* name : {"transport.json", "saddle.json", "localized.json"}) {
    const ExperimentConfig cfg = load_config(config_path(name), {});
    const ExperimentConfig again = parse_config(Json::parse(cfg.effective.dump()));
    CHECK(again.effective == cfg.effective);
    CHECK(config_hash(again.effective) == config_hash(cfg.effective));
  }
}

TEST_CASE("overrides") {
  Json cfg = default_config();
  apply_override(cfg, "solver.dx=0.025");
  CHECK(cfg["solver"]["dx"] == 0.025);
  apply_override(cfg, "solver.scheme=lax-friedrichs");
  CHECK(cfg["solver"]["scheme"] == "lax-friedrichs");
  CHECK_THROWS_AS(apply_override(cfg, "solver.dx"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "nowhere.x=1"), ConfigError);
}

TEST_CASE("sample-env and solve write their outputs") {
  const fs::path dir = scratch("solve");
  CHECK(run({"sample-env", "--config", config_path("transport.json"), "--out", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "env.csv"));
  CHECK(run({"solve", "--config", config_path("transport.json"), "--out", dir.string()}).code == 0);
  CHECK(fs::exists(dir / "field.csv"));
  REQUIRE(fs::exists(dir / "telemetry.jsonl"));
  std::ifstream tel(dir / "telemetry.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(tel, line)) {
    CHECK_NOTHROW((void)Json::parse(line));
    ++lines;
  }
  CHECK(lines > 2);
}
