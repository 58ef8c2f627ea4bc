#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "adaptsc/adaptive_driver.hpp"
#include "adaptsc/fem_assembly.hpp"

namespace adaptsc::cli {

struct ProblemConfig {
  std::string type = "fem";            // fem | ode
  int grid = 3;                        // l, 2^l cells per side
  std::string wind = "four_quadrant";  // four_quadrant | kl
  double sigma = 0.5;
  double epsilon = 0.1;
  double tau = 0.1;                    // hot-wall rate
  KlParameters kl;
};

/// Scalar ODE and its demo study.
struct OdeConfig {
  double epsilon = 0.1;
  double u0 = 1.0;
  double final_time = 100.0;   // statistics and interpolation curves
  int times = 50;
  double horizon = 1000.0;     // timestepping curves
  double tolerance = 1e-7;
  double fixed_step = 0.1;
};

struct ReferenceConfig {
  int degree = 3;              // total-degree set, sum(nu_i - 1) <= degree
  double tolerance = 1e-6;
  int times = 50;
};

struct ExperimentConfig {
  ProblemConfig problem;
  OdeConfig ode;
  AdaptiveConfig adaptive;
  std::optional<ReferenceConfig> reference;
  int naive_degree = 2;        // Smolyak set of the naive cost column
  std::string output_dir = "out";
  unsigned seed = 0;
};

/// Every problem found in a config file, each prefixed with its key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Throws ConfigError when a subcommand needs a block the config does not have.
void require_blocks(const ExperimentConfig& config, const std::string& subcommand);

std::unique_ptr<ParametricProblem> make_problem(const ExperimentConfig& config);

/// Writes the artifacts of one subcommand into `out`. Warnings go to `log`.
void run_ode_demo(const ExperimentConfig& config, const std::string& out, std::ostream& log);
void run_adaptive_command(const ExperimentConfig& config, const std::string& out, std::ostream& log);
void run_reference_command(const ExperimentConfig& config, const std::string& out, std::ostream& log);
void run_effectivity_command(const ExperimentConfig& config, const std::string& out, std::ostream& log);

}  // namespace adaptsc::cli
