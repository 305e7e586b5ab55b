#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hfevd/cli.hpp"
#include "hfevd/data.hpp"
#include "support.hpp"

using namespace hfevd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(HFEVD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("decompose on a DAR(1) config") {
  TempDir dir("hfevd_cli_dar");
  write(dir.path / "dar.json", R"({
    "version": 1, "seed": 11,
    "model": {"name": "dar1", "params": {"phi": 0.5, "alpha": 1.0, "beta": 0.5}},
    "run": {"history": {"values": [[0.0]]}, "h": 2, "S": 20000,
            "truncation": {"max_total_degree": 3, "max_active": 2},
            "partitions": [{"type": "linear"}, {"type": "nonlinear"}]}})");
  REQUIRE(run("decompose --config " + (dir.path / "dar.json").string() + " --out " + (dir.path / "out").string()) == 0);
  const std::string shares = slurp(dir.path / "out" / "shares.csv");
  for (const char* label : {"e1[t+1]", "e1[t+2]", "e1[t+1]^2*e1[t+2]"}) CHECK(shares.find(label) != std::string::npos);
  const Json report = Json::parse(slurp(dir.path / "out" / "report.json"));
  CHECK(report["command"] == "decompose");
  CHECK(report["partitions"].size() == 2);
  CHECK(fs::exists(dir.path / "out" / "linear_by_horizon.csv"));

  // Seed override changes the output; same seed reproduces it byte for byte.
  REQUIRE(run("decompose --config " + (dir.path / "dar.json").string() + " --out " + (dir.path / "b").string()) == 0);
  CHECK(slurp(dir.path / "b" / "report.json") == slurp(dir.path / "out" / "report.json"));
  REQUIRE(run("decompose --config " + (dir.path / "dar.json").string() + " --seed 12 --out " +
              (dir.path / "c").string()) == 0);
  CHECK(slurp(dir.path / "c" / "report.json") != slurp(dir.path / "out" / "report.json"));
}

TEST_CASE("simulate, fit-tvar and decompose from the fit") {
  TempDir dir("hfevd_cli_chain");
  write(dir.path / "sim.json", R"({
    "version": 1, "seed": 3,
    "model": {"name": "tvar", "params": {"A1": [[0.6, 0.1], [-0.2, 0.3]], "A2": [[-0.3, 0.0], [0.2, 0.5]],
              "D1": [[0.5, 0], [0.1, 0.4]], "D2": [[1, 0], [-0.3, 0.8]], "threshold": 0.17, "trigger": 1}},
    "run": {"T": 3000, "burn_in": 100, "names": ["spread", "growth"]},
    "output": {"dir": "sim"}})");
  REQUIRE(run("simulate --config " + (dir.path / "sim.json").string()) == 0);
  REQUIRE(fs::exists(dir.path / "sim" / "data.csv"));

  write(dir.path / "fit.json", R"({"version": 1, "seed": 3,
    "data": {"path": "sim/data.csv", "date_column": "date", "columns": ["spread", "growth"]},
    "run": {"trigger": 1, "grid": {"points": 40}}, "output": {"dir": "fit"}})");
  REQUIRE(run("fit-tvar --config " + (dir.path / "fit.json").string()) == 0);
  const Json fit = Json::parse(slurp(dir.path / "fit" / "fit.json"));
  CHECK(std::abs(fit["threshold"].get<double>() - 0.17) < 0.2);
  CHECK(fs::exists(dir.path / "fit" / "criterion.csv"));

  write(dir.path / "dec.json", R"({"version": 1, "seed": 5, "model": {"fit": "fit/fit.json"},
    "data": {"path": "sim/data.csv", "date_column": "date", "columns": ["spread", "growth"]},
    "run": {"history": {"select": "last"}, "h": 3, "S": 5000,
            "partitions": [{"type": "isakin_ngo", "component": 1}]},
    "output": {"dir": "dec"}})");
  REQUIRE(run("decompose --config " + (dir.path / "dec.json").string()) == 0);
  const Json report = Json::parse(slurp(dir.path / "dec" / "report.json"));
  CHECK(report["metadata"]["model"] == "tvar");
  CHECK(report["partitions"][0]["name"].get<std::string>().size() > 0);
}

TEST_CASE("failures produce error.json and a nonzero exit") {
  TempDir dir("hfevd_cli_err");
  write(dir.path / "noseed.json", R"({"version": 1, "model": {"name": "dar1", "params": {}},
    "run": {"history": {"values": [[0.0]]}, "h": 1, "S": 100}})");
  CHECK(run("decompose --config " + (dir.path / "noseed.json").string() + " --out " + dir.path.string()) != 0);
  const Json err = Json::parse(slurp(dir.path / "error.json"));
  CHECK(err["error"]["code"] == "cli.schema");

  write(dir.path / "unknown.json", R"({"version": 1, "seed": 1, "model": {"name": "garch", "params": {}},
    "run": {"history": {"values": [[0.0]]}, "h": 1, "S": 100}})");
  CHECK(run("decompose --config " + (dir.path / "unknown.json").string() + " --out " + dir.path.string()) != 0);
  CHECK(Json::parse(slurp(dir.path / "error.json"))["error"]["code"] == "registry.spec");

  CHECK(run("frobnicate --config " + (dir.path / "unknown.json").string() + " --out " + dir.path.string()) != 0);
  CHECK(run("decompose") != 0);
}

TEST_CASE("partition specs from JSON") {
  const auto parts = partitions_from_json(Json::parse(R"([
    {"type": "marginal", "component": 2, "max_degree": 3},
    {"type": "specific", "component": 1, "horizon": 2, "degree": 2, "name": "sq"},
    {"type": "explicit", "indices": [[1, 0, 0, 1]]}])"));
  REQUIRE(parts.size() == 3);
  const auto& m = std::get<select::Marginal>(parts[0].selector);
  CHECK(m.component == 1);
  CHECK(m.max_degree == 3);
  CHECK(parts[1].name == "sq");
  CHECK(std::get<select::Specific>(parts[1].selector).horizon == 1);
  CHECK(std::get<select::Explicit>(parts[2].selector).indices.front() == MultiIndex{1, 0, 0, 1});
  hfevd_test::check_error([] { partitions_from_json(Json::parse(R"([{"type": "bogus"}])")); }, "cli.schema");
  hfevd_test::check_error([] { partitions_from_json(Json::parse(R"([{"type": "marginal", "component": 0}])")); },
                          "cli.schema");
}

}  // TEST_SUITE
