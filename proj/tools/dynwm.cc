// Command-line driver: Monte Carlo runs, rho sweeps and preset inspection.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dynwm/error.h"
#include "dynwm/experiment.h"
#include "dynwm/gains.h"
#include "dynwm/json_io.h"
#include "dynwm/presets.h"
#include "dynwm/scenario.h"

namespace {

using dynwm::ScenarioConfig;

std::vector<double> parse_rho_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) {
      throw dynwm::Error(dynwm::ErrorCode::kInvalidConfig,
                         "bad rho value '" + item + "'");
    }
    grid.push_back(value);
  }
  if (grid.empty()) {
    throw dynwm::Error(dynwm::ErrorCode::kInvalidConfig, "empty rho grid");
  }
  return grid;
}

ScenarioConfig load_or_default(const std::string& path) {
  return path.empty() ? dynwm::default_lane_keeping_scenario()
                      : dynwm::load_scenario(path);
}

void print_warnings(const ScenarioConfig& config) {
  for (const auto& w : config.validate()) std::cerr << "warning: " << w << "\n";
}

// One matrix row per line keeps the committed reference file diffable.
std::string gains_to_text(const dynwm::ControllerConfig& ctl) {
  std::string text = "{\n";
  const std::pair<const char*, const dynwm::Matrix*> blocks[] = {
      {"K", &ctl.K}, {"L1", &ctl.L1}, {"L2", &ctl.L2}};
  for (std::size_t b = 0; b < std::size(blocks); ++b) {
    const nlohmann::json rows = dynwm::matrix_to_json(*blocks[b].second);
    text += std::string("  \"") + blocks[b].first + "\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      text += "    " + rows[i].dump() + (i + 1 < rows.size() ? ",\n" : "\n");
    }
    text += b + 1 < std::size(blocks) ? "  ],\n" : "  ]\n";
  }
  return text + "}\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic watermarking with sensor switching"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::int64_t trials = 0;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
  std::string rho_text;

  auto* run = app.add_subcommand("run", "Run the Monte Carlo trials of a scenario");
  run->add_option("--config", config_path, "Scenario JSON file")->required();
  run->add_option("--trials", trials, "Override the trial count");
  run->add_option("--steps", steps, "Override the steps per trial");
  run->add_option("--seed", seed, "Override the base seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Sweep rho and write sweep.csv");
  sweep->add_option("--config", config_path, "Scenario JSON file")->required();
  sweep->add_option("--rho-grid", rho_text, "Comma-separated rho values")
      ->required();
  sweep->add_option("--trials", trials, "Override the trial count");
  sweep->add_option("--steps", steps, "Override the steps per trial");
  sweep->add_option("--seed", seed, "Override the base seed");
  sweep->add_option("--out", out_dir, "Output directory");

  std::string preset;
  auto* print = app.add_subcommand("print-preset", "Print a preset scenario as JSON");
  print->add_option("name", preset, "Preset name")
      ->required()
      ->check(CLI::IsMember({"lane-keeping"}));

  std::string gains_out;
  auto* design = app.add_subcommand(
      "design-gains", "Synthesize LQR gains for a scenario's model");
  design->add_option("--config", config_path,
                     "Scenario JSON file (default: lane-keeping preset)");
  design->add_option("--out", gains_out, "Write the gains here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    auto apply_overrides = [&](ScenarioConfig& c) {
      if (run->count("--trials") || sweep->count("--trials")) c.trials = trials;
      if (run->count("--steps") || sweep->count("--steps")) c.steps = steps;
      if (run->count("--seed") || sweep->count("--seed")) c.seed = seed;
    };

    if (*run) {
      ScenarioConfig config = dynwm::load_scenario(config_path);
      apply_overrides(config);
      print_warnings(config);
      const auto results = dynwm::run_monte_carlo(config, out_dir);
      std::int64_t detected = 0;
      for (const auto& r : results) detected += r.detected_at.has_value();
      std::cout << results.size() << " trials, " << detected
                << " with a switch to the protected sensor; wrote " << out_dir
                << "\n";
    } else if (*sweep) {
      ScenarioConfig config = dynwm::load_scenario(config_path);
      apply_overrides(config);
      config.rho_grid = parse_rho_grid(rho_text);
      print_warnings(config);
      std::filesystem::create_directories(out_dir);
      const auto rows = dynwm::run_sweep(config, config.rho_grid);
      dynwm::write_sweep_csv(std::filesystem::path(out_dir) / "sweep.csv", rows);
      std::cout << "wrote " << rows.size() << " rows to "
                << (std::filesystem::path(out_dir) / "sweep.csv").string() << "\n";
    } else if (*print) {
      std::cout << dynwm::scenario_to_json(dynwm::default_lane_keeping_scenario())
                       .dump(2)
                << "\n";
    } else if (*design) {
      ScenarioConfig config = load_or_default(config_path);
      const auto ctl = dynwm::design_or_validate_gains(config.model, std::nullopt,
                                                       config.watermark_support);
      const std::string text = gains_to_text(ctl);
      if (gains_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(gains_out);
        out << text;
        if (!out) {
          throw dynwm::Error(dynwm::ErrorCode::kIOFailure,
                             "cannot write " + gains_out);
        }
      }
    }
  } catch (const dynwm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
