#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgm/commands.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string item =
        csv.substr(pos, comma == std::string::npos ? csv.size() - pos
                                                   : comma - pos);
    size_t used = 0;
    values.push_back(std::stod(item, &used));
    if (used != item.size())
      throw std::invalid_argument("bad number '" + item + "' in --values");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standing-wave solver for a charged scalar field on a ball"};
  app.require_subcommand(1);

  std::string config_path, experiment_name, sweep_param, sweep_values;

  auto* solve = app.add_subcommand(
      "solve", "Minimize the reduced energy and write profiles");
  solve->add_option("config", config_path, "configuration file")->required();

  auto* verify = app.add_subcommand(
      "verify", "Certify the analytic claims on random admissible fields");
  verify->add_option("config", config_path, "configuration file")->required();

  auto* experiment = app.add_subcommand(
      "experiment", "Run one named experiment (blowup, noQ, nonexistence)");
  experiment->add_option("name", experiment_name, "experiment name")
      ->required();
  experiment->add_option("config", config_path, "configuration file")
      ->required();

  auto* sweep = app.add_subcommand(
      "sweep", "Solve once per value of a swept parameter");
  sweep->add_option("config", config_path, "configuration file")->required();
  sweep->add_option("--param", sweep_param, "omega, alpha, or m")->required();
  sweep
      ->add_option("--values", sweep_values,
                   "comma-separated list, e.g. 0,0.25,0.5")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const kgm::RunConfig cfg = kgm::load_config(config_path);
    if (solve->parsed()) return kgm::cmd_solve(cfg);
    if (verify->parsed()) return kgm::cmd_verify(cfg);
    if (experiment->parsed())
      return kgm::cmd_experiment(experiment_name, cfg);
    return kgm::cmd_sweep(cfg, sweep_param, parse_values(sweep_values));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
