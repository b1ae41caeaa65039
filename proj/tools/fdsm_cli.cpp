#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "fdsm/cli/config.hpp"
#include "fdsm/cli/experiment.hpp"
#include "fdsm/errors.hpp"
#include "fdsm/grid/grid_model.hpp"

namespace {

constexpr int kInvalidConfig = 2;
constexpr int kIntractable = 3;

fdsm::ConfigResult load(const std::string& source) {
  if (const auto text = fdsm::preset_text(source)) return fdsm::validate_config(*text);
  return fdsm::load_config_file(source);
}

std::string output_dir(const fdsm::ExperimentConfig& config, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!config.output.empty()) return config.output;
  const char* root = std::getenv("FDSM_OUTPUT_ROOT");
  return (std::filesystem::path(root ? root : "results") / config.name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foresighted demand-side management experiments"};
  app.require_subcommand(1);

  std::string source;
  std::string out;
  std::string schemes;
  std::string seeds;
  std::string horizon;
  std::string threads;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a preset or config file");
  run->add_option("source", source, "Preset name or config path")->required();
  run->add_option("--seeds", seeds, "Number of seeds (overrides the config)");
  run->add_option("--out", out, "Output directory (default: $FDSM_OUTPUT_ROOT/<name> or results/<name>)");
  run->add_option("--scheme", schemes, "Comma-separated schemes (overrides the config)");
  run->add_option("--horizon", horizon, "Episode length in periods (overrides the config)");
  run->add_option("--threads", threads, "Parallel seed runs (overrides the config)");
  run->add_flag("--quiet", quiet, "Only print the summary table");

  std::string validate_source;
  auto* validate = app.add_subcommand("validate", "Check a config file or preset and print the resolved config");
  validate->add_option("source", validate_source, "Preset name or config path")->required();

  std::string case_path;
  double line_capacity = 100.0;
  auto* parse = app.add_subcommand("parse", "Print a summary of a CDF case file");
  parse->add_option("case", case_path, "CDF file")->required();
  parse->add_option("--line-capacity", line_capacity, "Rating for branches without one (MW)");

  auto* presets = app.add_subcommand("presets", "List the built-in presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      for (const auto& name : fdsm::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (*parse) {
      const fdsm::GridModel grid =
          fdsm::parse_cdf_file(fdsm::resolve_case_path(case_path, "."), fdsm::CdfOptions{line_capacity});
      std::cout << grid.title << "\n"
                << grid.bus_count() << " buses, " << grid.line_count() << " branches\n"
                << grid.generator_count() << " generators at buses";
      for (int b : grid.generator_buses()) std::cout << " " << b;
      std::cout << "\n" << grid.aggregator_count() << " aggregators at buses";
      for (int b : grid.aggregator_buses()) std::cout << " " << b;
      std::cout << "\n";
      return 0;
    }
    if (*validate) {
      const fdsm::ConfigResult r = load(validate_source);
      if (!r.ok()) {
        std::cerr << r.describe();
        return kInvalidConfig;
      }
      std::cout << fdsm::format_config(*r.config);
      return 0;
    }

    const fdsm::ConfigResult r = load(source);
    if (!r.ok()) {
      std::cerr << r.describe();
      return kInvalidConfig;
    }
    fdsm::ExperimentConfig config = *r.config;
    const std::pair<std::string, std::string> overrides[] = {
        {"experiment.schemes", schemes},
        {"experiment.seeds", seeds},
        {"experiment.horizon", horizon},
        {"experiment.threads", threads},
    };
    for (const auto& [path, value] : overrides) {
      if (value.empty()) continue;
      const std::string message = fdsm::set_config_value(config, path, value);
      if (!message.empty()) {
        std::cerr << path << ": " << message << "\n";
        return kInvalidConfig;
      }
    }
    const std::string dir = output_dir(config, out);
    const fdsm::ExperimentResult result = fdsm::run_experiment(config, quiet ? nullptr : &std::cerr);
    fdsm::write_experiment(config, result, dir);
    std::cout << fdsm::summary_table(result);
    if (!quiet) std::cerr << "outputs written to " << dir << "\n";
    return 0;
  } catch (const fdsm::IntractableError& e) {
    std::cerr << "error: " << e.what() << " (" << e.state_count << " joint states)\n";
    return kIntractable;
  } catch (const fdsm::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const fdsm::ParseError& e) {
    std::cerr << "invalid case file: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
