#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "adaptsc/adaptive_driver.hpp"
#include "experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;

using Command = std::function<void(const adaptsc::cli::ExperimentConfig&, const std::string&, std::ostream&)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sparse-grid stochastic collocation for parametric advection-diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  int threads = 1;

  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"ode-demo", {"Statistics, interpolation and timestepping study of the scalar ODE", adaptsc::cli::run_ode_demo}},
      {"run-adaptive", {"Adaptive collocation run", adaptsc::cli::run_adaptive_command}},
      {"reference", {"Fixed total-degree reference solve", adaptsc::cli::run_reference_command}},
      {"effectivity", {"Adaptive run compared with a reference solve", adaptsc::cli::run_effectivity_command}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out, "Output directory (overrides output.directory)");
    sub->add_option("--threads", threads, "Worker threads for per-point integration")
        ->check(CLI::Range(1, 256));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  adaptsc::cli::ExperimentConfig config;
  try {
    config = adaptsc::cli::parse_config(config_path);
    adaptsc::cli::require_blocks(config, name);
  } catch (const adaptsc::cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  }
  config.adaptive.threads = threads;
  if (out.empty()) out = config.output_dir;

  try {
    commands.at(name).second(config, out, std::cerr);
  } catch (const adaptsc::cli::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const adaptsc::IntegrationFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
