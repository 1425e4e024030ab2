#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "nastab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = nastab::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("nastab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_duration(std::string s) {
  return std::regex_replace(s, std::regex("\"duration_s\": [^,\\n]*"), "\"duration_s\": 0");
}

}  // namespace

TEST_CASE("check: exit codes of the three controls") {
  auto ex = cli({"check", "--builtin", "example17", "--mode", "uniform", "--samples", "20000"});
  CHECK(ex.code == 0);
  CHECK(ex.out.find("uniform stability theorem") != std::string::npos);

  auto lin = cli({"check", "--builtin", "linear_decay", "--mode", "asymptotic"});
  CHECK(lin.code == 0);
  CHECK(lin.out.find("asymptotic") != std::string::npos);

  auto bad = cli({"check", "--builtin", "unstable_linear", "--mode", "uniform"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("[fail]") != std::string::npos);
  CHECK(bad.out.find("violated: dV/dt - max{W*,0} <= 0") != std::string::npos);
}

TEST_CASE("check: usage and config errors exit 2") {
  CHECK(cli({"check"}).code == 2);
  CHECK(cli({"check", "--builtin", "nope"}).code == 2);
  CHECK(cli({"check", "--builtin", "linear_decay", "--mode", "sideways"}).code == 2);
  CHECK(cli({"check", "--builtin", "linear_decay", "--param", "speed=2"}).code == 2);
  CHECK(cli({"check", "--config", "/nonexistent.toml"}).code == 2);
  CHECK(cli({"check", "--builtin", "unstable_linear", "--mode", "asymptotic"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("check: inconclusive only exits 3") {
  // the conditions hold, but every budget trajectory leaves the domain
  // before its integral can be compared with M
  auto dir = scratch("inconclusive");
  std::ofstream(dir / "c.toml") << R"toml(
[system]
n = 1
domain_radius = 1
f = ["x1"]
[certificate]
V = "x1^2"
V1 = "x1^2"
V2 = "x1^2"
Wstar = "2 * x1^2"
M = "100"
)toml";
  auto r = cli({"check", "--config", (dir / "c.toml").string(), "--init-count", "4"});
  CHECK(r.code == 3);
}

TEST_CASE("check: JSON report is deterministic apart from the duration") {
  std::vector<std::string> args{"--seed", "7", "--json", "check", "--builtin", "example17",
                                "--samples", "20000"};
  auto a = cli(args);
  auto b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(without_duration(a.out) == without_duration(b.out));
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["manifest"]["knobs"]["seed"] == 7);
  CHECK(j["manifest"]["source"] == "builtin:example17");
  CHECK(j["status"] == "pass");
  CHECK(j["checks"].size() == 3);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("margin_min"));
    CHECK(c.contains("margin_mean"));
    CHECK(c.contains("samples"));
    CHECK(c.contains("witness"));
  }
  // the human summary moves to stderr
  CHECK(a.err.find("theorem") != std::string::npos);

  auto c = cli({"--seed", "8", "--json", "check", "--builtin", "example17", "--samples",
                "20000"});
  CHECK(without_duration(c.out) != without_duration(a.out));
}

TEST_CASE("check: --report writes the JSON file") {
  auto dir = scratch("report");
  auto r = cli({"check", "--builtin", "linear_decay", "--report", (dir / "r.json").string()});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(j["manifest"]["command"] == "check");
  CHECK(j["exit_code"] == 0);
}

TEST_CASE("check: global mode runs the radial check") {
  auto r = cli({"--json", "check", "--builtin", "linear_decay", "--mode", "global"});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["checks"].size() == 4);
}

TEST_CASE("matrosov: pipeline, constant W and bad annulus") {
  auto ok = cli({"--json", "matrosov", "--builtin", "matrosov_oscillator"});
  CHECK(ok.code == 0);
  auto j = nlohmann::json::parse(ok.out);
  CHECK(j["definiteness"]["xi_hat"].get<double>() > 0.2);
  CHECK(j["N_max"].get<int>() >= 1);
  CHECK(j["checks"].size() == 3);

  auto cw = cli({"matrosov", "--config", NASTAB_CONFIG_DIR "/constant_w.toml"});
  CHECK(cw.code == 1);
  CHECK(cli({"matrosov", "--builtin", "matrosov_oscillator", "--alpha", "1", "--A",
             "0.5"})
            .code == 2);
  CHECK(cli({"matrosov", "--builtin", "linear_decay"}).code == 2);

  auto inflated = cli({"matrosov", "--builtin", "matrosov_oscillator", "--xi-scale", "10"});
  CHECK(inflated.code == 1);
  CHECK(inflated.out.find("2L/xi") != std::string::npos);

  auto file = cli({"matrosov", "--config", NASTAB_CONFIG_DIR "/damped_oscillator.toml"});
  CHECK(file.code == 0);
}

TEST_CASE("simulate: CSV output and usage errors") {
  auto r = cli({"simulate", "--builtin", "linear_decay", "--x0", "1", "--tf", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("t,x1\n", 0) == 0);
  const auto last = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
  CHECK(last.rfind("1,0.36787944", 0) == 0);

  auto dir = scratch("simulate");
  auto f = cli({"simulate", "--builtin", "example17", "--x0", "0.3,0.4", "--tf", "5", "--out",
                (dir / "x.csv").string()});
  CHECK(f.code == 0);
  CHECK(slurp(dir / "x.csv").rfind("t,x1,x2\n", 0) == 0);

  CHECK(cli({"simulate", "--builtin", "linear_decay"}).code == 2);
  CHECK(cli({"simulate", "--builtin", "linear_decay", "--x0", "1,2"}).code == 2);
  CHECK(cli({"simulate", "--builtin", "linear_decay", "--x0", "abc"}).code == 2);

  auto exits = cli({"simulate", "--builtin", "unstable_linear", "--x0", "1", "--tf", "5"});
  CHECK(exits.code == 0);
  CHECK(exits.err.find("left_domain") != std::string::npos);
}

TEST_CASE("delta: tables, summary and plot data") {
  auto dir = scratch("delta");
  auto r = cli({"delta", "--builtin", "linear_decay", "--eps-grid", "0.1,0.5", "--t0-grid",
                "0,5", "--out", dir.string()});
  CHECK(r.code == 0);
  const std::string table = slurp(dir / "delta_table.csv");
  CHECK(table.rfind("epsilon,t0,delta\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  auto j = nlohmann::json::parse(slurp(dir / "delta_summary.json"));
  for (const auto& row : j["stability"]["rows"]) {
    CHECK(row["spread"].get<double>() <= 1e-3);
  }
  CHECK(fs::exists(dir / "delta_plot.dat"));

  auto un = cli({"delta", "--builtin", "unstable_linear", "--out", (dir / "u").string()});
  CHECK(un.code == 1);
  auto uj = nlohmann::json::parse(slurp(dir / "u" / "delta_summary.json"));
  for (const auto& row : uj["stability"]["rows"]) {
    CHECK(row["uniform_delta"].get<double>() == 0.0);
  }

  auto ex = cli({"delta", "--builtin", "example17", "--out", (dir / "e").string(), "--eta",
                 "0.05", "--c", "0.5"});
  CHECK(ex.code == 0);
  const std::string settle = slurp(dir / "e" / "settling_table.csv");
  CHECK(settle.rfind("eta,c,t0,T\n", 0) == 0);
  CHECK(settle.find("nan") != std::string::npos);
  CHECK(cli({"delta", "--builtin", "linear_decay", "--eps-grid", "5"}).code == 2);
  CHECK(cli({"delta", "--builtin", "linear_decay", "--eta", "0.1"}).code == 2);
}
