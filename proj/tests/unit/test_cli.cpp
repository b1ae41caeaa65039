#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdsm/cli/config.hpp"
#include "fdsm/cli/experiment.hpp"
#include "fdsm/errors.hpp"

using namespace fdsm;

namespace {

namespace fs = std::filesystem;

bool has_issue(const ConfigResult& r, const std::string& path, const std::string& fragment = "") {
  for (const auto& i : r.issues) {
    if (i.path == path && i.message.find(fragment) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fdsm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FDSM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("empty config yields the default setup") {
  const ConfigResult r = validate_config("");
  REQUIRE(r.ok());
  const ExperimentConfig& c = *r.config;
  CHECK(c.coordinator.discount == 0.99);
  CHECK(c.scenario.demand.peak_mean == 50.0);
  CHECK(c.scenario.demand.offpeak_mean == 25.0);
  CHECK(c.scenario.demand.peak_range == 5.0);
  CHECK(c.scenario.demand.offpeak_range == 2.0);
  CHECK(c.scenario.demand.peak_first == 17);
  CHECK(c.scenario.demand.peak_last == 22);
  CHECK(c.storage_sweep == std::vector<double>{25.0});
  CHECK(c.scenario.storage_cost == 2.0);
  CHECK(c.scenario.quadratic == 0.5);
  CHECK(c.scenario.ramp == 0.1);
  CHECK(c.scenario.renewable_mean == 100.0);
  CHECK(c.uncertainty_sweep == std::vector<double>{10.0});
  CHECK(c.scenario.degrade_lines);
  CHECK(c.scenario.degrade_factor == 0.9);
  CHECK(fs::path(c.scenario.case_path).filename() == "ieee14.cdf");
  CHECK(fs::exists(c.scenario.case_path));
}

TEST_CASE("field-level validation errors name the path and the range") {
  {
    const ConfigResult r = validate_config("[experiment]\ndiscount = 1.0\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "experiment.discount", "discount must be < 1"));
  }
  {
    const ConfigResult r = validate_config("[storage]\ncapacities = 5, -5\n");
    CHECK_FALSE(r.ok());
    CHECK(has_issue(r, "storage.capacities", "-5"));
    CHECK(has_issue(r, "storage.capacities", "[0, inf)"));
  }
  {
    const ConfigResult r = validate_config("[experiment]\nseeds = 0\nhorizon = ten\n");
    CHECK(has_issue(r, "experiment.seeds", "outside [1, inf]"));
    CHECK(has_issue(r, "experiment.horizon", "expected an integer"));
  }
  {
    const ConfigResult r = validate_config("[system]\ndegrade_factor = 1.5\n");
    CHECK(has_issue(r, "system.degrade_factor", "(0, 1]"));
  }
  {
    const ConfigResult r = validate_config("[experiment]\nschemes = proposed, greedy\n");
    CHECK(has_issue(r, "experiment.schemes", "greedy"));
  }
}

TEST_CASE("unknown keys, sections and syntax errors are rejected") {
  CHECK(has_issue(validate_config("[storage]\ncapacity = 5\n"), "storage.capacity", "unknown key"));
  CHECK(has_issue(validate_config("[network]\ncase = x\n"), "network", "unknown section"));
  CHECK(has_issue(validate_config("seeds = 3\n"), "seeds", "outside any section"));
  const ConfigResult broken = validate_config("[experiment]\nseeds = 2\nthis line has no equals sign\n");
  CHECK_FALSE(broken.ok());
  REQUIRE(broken.issues.size() == 1);
  CHECK(broken.issues[0].path == "line 3");
  CHECK(has_issue(validate_config("[system]\ncase = nowhere.cdf\n"), "system.case", "not found"));
}

TEST_CASE("inline comments are stripped from values") {
  const ConfigResult r = validate_config("[storage]\ncapacities = 15, 45   ; sweep\n[system]\nline_capacity = 80 # MW\n");
  REQUIRE(r.ok());
  CHECK(r.config->storage_sweep == std::vector<double>{15.0, 45.0});
  CHECK(r.config->scenario.default_line_capacity == 80.0);
}

TEST_CASE("cross-field checks") {
  CHECK(has_issue(validate_config("[coordinator]\nmin_iterations = 5\nmax_iterations = 2\n"),
                  "coordinator.min_iterations"));
  CHECK(has_issue(validate_config("[demand]\npeak_first = 20\npeak_last = 18\n"), "demand.peak_first"));
  CHECK(has_issue(validate_config("[experiment]\nkind = policy_table\n"), "experiment.policy_table"));
}

TEST_CASE("resolved config round trips") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const ConfigResult first = validate_config(*preset_text(name));
    REQUIRE(first.ok());
    const std::string text = format_config(*first.config);
    const ConfigResult second = validate_config(text);
    REQUIRE(second.ok());
    CHECK(format_config(*second.config) == text);
  }
  CHECK_FALSE(preset_text("fig99").has_value());
}

TEST_CASE("single field overrides use the parser checks") {
  ExperimentConfig c = *validate_config("").config;
  CHECK(set_config_value(c, "experiment.seeds", "3").empty());
  CHECK(c.seeds == 3);
  CHECK(set_config_value(c, "experiment.schemes", "myopic").empty());
  CHECK(c.schemes == std::vector<StrategyKind>{StrategyKind::myopic});
  CHECK_FALSE(set_config_value(c, "experiment.seeds", "-1").empty());
  CHECK_FALSE(set_config_value(c, "experiment.colour", "red").empty());
}

TEST_CASE("micro preset matches the golden outputs") {
  const ConfigResult r = validate_config(*preset_text("micro"));
  REQUIRE(r.ok());
  ExperimentConfig config = *r.config;
  config.threads = 2;
  const ExperimentResult result = run_experiment(config);
  const fs::path dir = scratch("golden");
  write_experiment(config, result, dir.string());
  const fs::path golden = fs::path(FDSM_TEST_DIR) / "golden" / "micro";
  for (const char* file : {"costs.csv", "prices.csv", "policy_table.csv", "convergence.csv"}) {
    CAPTURE(file);
    CHECK(slurp(dir / file) == slurp(golden / file));
  }
  // Costs: five schemes for each of the two seeds.
  CHECK(result.costs.size() == 10);
  const ConfigResult again = validate_config(slurp(dir / "config.ini"));
  REQUIRE(again.ok());
  CHECK(format_config(*again.config) == format_config(config));
}

TEST_CASE("thread count does not change the outputs") {
  ExperimentConfig config = *validate_config(*preset_text("micro")).config;
  config.seeds = 3;
  config.threads = 1;
  const ExperimentResult a = run_experiment(config);
  config.threads = 3;
  const ExperimentResult b = run_experiment(config);
  std::ostringstream ca, cb;
  write_costs_csv(ca, a.costs);
  write_costs_csv(cb, b.costs);
  CHECK(ca.str() == cb.str());
}

TEST_CASE("intractable centralized rows are marked when skipping is allowed") {
  ExperimentConfig config = *validate_config(*preset_text("micro")).config;
  config.schemes = {StrategyKind::centralized, StrategyKind::myopic};
  config.state_limit = 10;
  config.skip_intractable = true;
  const ExperimentResult result = run_experiment(config);
  std::ostringstream out;
  write_costs_csv(out, result.costs);
  CHECK(out.str().find("centralized,1,10,1,intractable,,,,,,") != std::string::npos);
  config.skip_intractable = false;
  CHECK_THROWS_AS(run_experiment(config), IntractableError);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("exit");
  {
    std::ofstream bad(dir / "bad.ini");
    bad << "[experiment]\ndiscount = 1.0\n";
  }
  {
    std::ofstream big(dir / "big.ini");
    big << "[experiment]\nschemes = centralized\nseeds = 1\nhorizon = 1\n[system]\ncase = ieee14.cdf\n";
  }
  CHECK(run_cli("validate micro") == 0);
  CHECK(run_cli("validate " + (dir / "bad.ini").string()) == 2);
  CHECK(run_cli("run " + (dir / "bad.ini").string()) == 2);
  CHECK(run_cli("run micro --seeds 0 --out " + (dir / "o").string()) == 2);
  CHECK(run_cli("run " + (dir / "big.ini").string() + " --out " + (dir / "big").string()) == 3);
  CHECK(run_cli("parse ieee14.cdf") == 0);
  CHECK(run_cli("run micro --quiet --out " + (dir / "micro").string()) == 0);
  CHECK(fs::exists(dir / "micro" / "costs.csv"));
  CHECK(fs::exists(dir / "micro" / "config.ini"));
}
