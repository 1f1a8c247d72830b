#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vpc/config.hpp"
#include "vpc/errors.hpp"
#include "vpc/run.hpp"
#include "vpc/snapshot.hpp"

using namespace vpc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vpc_test_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_run(const std::string& name) {
  auto c = parse_config(R"(
[initial]
radius = 1.5
M = 100
vacuum_radius = 0.3
seed = 3
charge = -0.6 0 0  0 0 0
charge = 0.6 0 0  0 0 0
[kernel]
epsilon_charge = 0.05
epsilon_plasma = 0.05
[integrator]
dt_max = 1e-3
output_stride = 2
[run]
T = 0.01
)");
  c.output = scratch(name).string();
  return c;
}

}  // namespace

TEST_SUITE("cli-io") {
  TEST_CASE("smoke run writes every artifact") {
    const auto c = small_run("smoke");
    const auto s = run_command(c);
    CHECK(s.exit_code == kExitPass);
    CHECK(s.error.empty());
    CHECK(s.final_time == c.T);
    CHECK(s.substeps >= 10);
    CHECK(s.windows == s.boundaries.size() - 1);
    CHECK(s.q_per_window.size() == s.windows);
    CHECK(s.max_energy_drift < 1e-3);
    const fs::path dir(c.output);
    for (const char* f : {"resolved_config.ini", "initial.snap", "final.snap", "diagnostics.csv", "summary.json"}) {
      CHECK(fs::exists(dir / f));
    }

    const auto echoed = slurp(dir / "resolved_config.ini");
    CHECK(echoed.rfind("# K1 resolves to ", 0) == 0);
    CHECK(parse_config(echoed) == c);

    const auto fin = read_snapshot((dir / "final.snap").string());
    CHECK(fin.header.time == c.T);
    CHECK(fin.header.M == 100);
    CHECK(fin.header.N == 2);
    CHECK(fin.header.config_hash == config_hash(c));
    const auto init = read_snapshot((dir / "initial.snap").string());
    CHECK(init.header.time == 0.0);

    std::istringstream csv(slurp(dir / "diagnostics.csv"));
    std::string header, line;
    std::getline(csv, header);
    CHECK(header.rfind("t,H,", 0) == 0);
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == s.rows);

    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["exit_code"] == 0);
    CHECK(j["monitors"].size() == c.monitors.enabled.size());
  }

  TEST_CASE("reruns are byte identical") {
    auto a = small_run("det_a");
    auto b = small_run("det_b");
    run_command(a);
    run_command(b);
    CHECK(slurp(fs::path(a.output) / "diagnostics.csv") == slurp(fs::path(b.output) / "diagnostics.csv"));
    CHECK(slurp(fs::path(a.output) / "final.snap").substr(72) ==
          slurp(fs::path(b.output) / "final.snap").substr(72));
  }

  TEST_CASE("a zero energy tolerance fails the run with exit 1") {
    auto c = small_run("tol0");
    c.monitors.energy_drift_tol = 0.0;
    const auto s = run_command(c);
    CHECK(s.exit_code == kExitMonitorFailure);
    bool found = false;
    for (const auto& t : s.monitors) {
      if (t.name == "energy_drift") {
        found = true;
        CHECK(t.failures > 0);
      }
    }
    CHECK(found);
  }

  TEST_CASE("no charges: one window, no Q") {
    auto c = small_run("nocharge");
    c.initial.charges.clear();
    const auto s = run_command(c);
    CHECK(s.exit_code == kExitPass);
    CHECK(s.windows == 1);
    CHECK(std::isnan(s.Q0));
  }

  TEST_CASE("an invalid configuration throws before any output") {
    auto c = small_run("invalid");
    c.T = -1.0;
    CHECK_THROWS_AS(run_command(c), ConfigError);
    CHECK_FALSE(fs::exists(c.output));
  }

  TEST_CASE("diagnostic columns follow the monitor list") {
    MonitorSettings m;
    m.enabled = {"separation"};
    const auto cols = diagnostics_columns(m);
    REQUIRE(cols.size() == 8);
    CHECK(cols[6] == "separation_pass");
    CHECK(cols[7] == "separation_fail");
  }
}
