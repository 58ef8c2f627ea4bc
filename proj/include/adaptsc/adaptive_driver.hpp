#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "adaptsc/analytic_ode.hpp"
#include "adaptsc/error_estimator.hpp"
#include "adaptsc/fem_assembly.hpp"
#include "adaptsc/multi_index.hpp"
#include "adaptsc/sparse_grid.hpp"
#include "adaptsc/timestepper.hpp"

namespace adaptsc {

/// A family of linear ODE systems M u' + A(y) u = f(t, y) sharing M and u(0).
class ParametricProblem {
 public:
  virtual ~ParametricProblem() = default;

  virtual std::size_t parameter_dim() const = 0;
  virtual LinearOde system(std::span<const double> y) const = 0;
  virtual Eigen::VectorXd initial_condition() const = 0;
  /// Matrix of the spatial inner product; null means Euclidean.
  virtual const SparseMatrix* norm_matrix() const = 0;
};

/// Double-glazing problem on a uniform Q1 mesh.
class FemProblem final : public ParametricProblem {
 public:
  FemProblem(const SpatialMesh& mesh, std::shared_ptr<const WindModel> wind, double epsilon, HotWall wall);

  std::size_t parameter_dim() const override { return assembler_.parameter_dim(); }
  LinearOde system(std::span<const double> y) const override;
  Eigen::VectorXd initial_condition() const override;
  const SparseMatrix* norm_matrix() const override { return &assembler_.mass(); }

  const Assembler& assembler() const { return assembler_; }

 private:
  Assembler assembler_;
};

/// The scalar complex ODE in real 2x2 form (one parameter). The Euclidean norm of
/// the embedding equals the complex modulus.
class ComplexOdeFamily final : public ParametricProblem {
 public:
  explicit ComplexOdeFamily(ComplexOdeProblem problem) : problem_(problem) {}

  std::size_t parameter_dim() const override { return 1; }
  LinearOde system(std::span<const double> y) const override;
  Eigen::VectorXd initial_condition() const override;
  const SparseMatrix* norm_matrix() const override { return nullptr; }

  const ComplexOdeProblem& problem() const { return problem_; }

 private:
  ComplexOdeProblem problem_;
};

enum class GlobalErrorMode { per_point, shared_at_mean };
enum class RefinementInit { reintegrate, interpolate };

struct AdaptiveConfig {
  double tolerance = 1e-3;              // local error tolerance delta
  double safety = 10.0;                 // c_safety
  double theta = 0.1;                   // Dorfler parameter
  double sync_step = 0.1 * 0.10536051565782628;  // tau ln(1/0.9) for tau = 0.1
  double grow = 1.2;                    // c+
  double shrink = 0.5;                  // c-
  double initial_step = 1e-9;
  double final_time = 100.0;
  GlobalErrorMode ge_mode = GlobalErrorMode::per_point;
  RefinementInit init = RefinementInit::reintegrate;
  double coarse_tolerance = 0.0;        // delta_0; zero selects 100 delta
  int max_level = 8;
  /// Times at which the estimator and u_A are recorded (strictly positive, ascending).
  std::vector<double> report_times;
  /// Optional fixed synchronization times; empty means the dynamic c+/c- law.
  std::vector<double> sync_schedule;
  bool record_history = false;
  int threads = 1;
  /// Called after every synchronization window with a one-line summary.
  std::function<void(const std::string&)> progress;

  double effective_coarse_tolerance() const { return coarse_tolerance > 0.0 ? coarse_tolerance : 100.0 * tolerance; }
  /// Every violated constraint, one message per entry.
  std::vector<std::string> violations() const;
  void validate() const;
};

/// Failure of the time integrator at a specific collocation point.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::vector<double>& point, double time, const std::string& what);
  const std::vector<double>& point() const { return point_; }
  double time() const { return time_; }

 private:
  std::vector<double> point_;
  double time_;
};

/// Algorithm-1 marking: largest indicators first (ties lexicographic), shortest prefix
/// whose sum reaches (1 - theta) of the total.
std::vector<MultiIndex> dorfler_mark(const std::map<MultiIndex, double>& indicators, double theta);

struct RefinementEvent {
  double time = 0.0;
  std::vector<MultiIndex> marked;
  double interpolation = 0.0;           // pi_I at the rejected candidate time
  double tolerance = 0.0;
  std::size_t n_colloc = 0;             // |X(I)| after refinement
  std::size_t n_colloc_enhanced = 0;
};

struct SyncWindow {
  double start = 0.0;
  double step = 0.0;                    // sync step from the c+/c- law
  double end = 0.0;                     // candidate time (the step may be clipped at T)
  bool accepted = false;
};

struct CostSample {
  double time = 0.0;
  std::size_t approximation_steps = 0;  // cumulative accepted TR-AB2 steps at tolerance delta
  std::size_t estimator_steps = 0;      // cumulative steps of the coarse runs
  std::size_t mean_point_steps = 0;     // steps of the y = 0 trajectory from 0 to time
  std::size_t n_colloc = 0;
  std::size_t n_colloc_enhanced = 0;
};

/// u_A at one time: the index set in effect and the values on its grid.
struct SolutionSnapshot {
  double time = 0.0;
  MultiIndexSet set{1};
  PointValues values;

  SparseInterpolant interpolant() const { return SparseInterpolant(set, values, time); }
};

struct AdaptiveResult {
  AdaptiveConfig config;
  MultiIndexSet final_set{1};
  double final_time = 0.0;
  std::vector<EstimatorReport> reports;         // accepted synchronization times
  std::vector<EstimatorReport> rejected;        // rejected candidate times
  std::vector<EstimatorReport> report_estimates;  // at config.report_times
  std::vector<SolutionSnapshot> snapshots;      // at config.report_times
  std::vector<RefinementEvent> refinements;
  std::vector<SyncWindow> windows;
  std::vector<CostSample> cost;
  std::vector<std::string> warnings;

  // Filled when record_history is set.
  std::map<GridPoint, Trajectory> trajectories;
  struct SetInterval {
    double start;
    double end;
    MultiIndexSet set;
  };
  std::vector<SetInterval> set_history;

  std::size_t total_approximation_steps() const { return cost.empty() ? 0 : cost.back().approximation_steps; }
  std::size_t total_estimator_steps() const { return cost.empty() ? 0 : cost.back().estimator_steps; }

  /// Index set used for the window containing t.
  const MultiIndexSet& set_at(double t) const;
  /// u_A(., t, .) from the recorded trajectories.
  SparseInterpolant interpolant_at(double t) const;
  /// u_A(x, t, y) as a field.
  Eigen::VectorXd evaluate(double t, std::span<const double> y) const;
};

AdaptiveResult run_adaptive(const ParametricProblem& problem, const AdaptiveConfig& config);

/// Fixed-set solve at every point of `set` with tolerance delta, sampled at `times`.
struct ReferenceSolution {
  MultiIndexSet set{1};
  std::vector<double> times;
  std::vector<PointValues> values;      // one map per time
  std::size_t total_steps = 0;

  SparseInterpolant interpolant(std::size_t k) const { return SparseInterpolant(set, values.at(k), times.at(k)); }
};

ReferenceSolution run_reference(const ParametricProblem& problem, const MultiIndexSet& set, double tolerance,
                                std::span<const double> times, double initial_step = 1e-9, int threads = 1);

/// The fifty log-spaced reference times from tau ln(1/0.9) to the final time.
std::vector<double> reference_times(double tau, double final_time, std::size_t count = 50);

struct EffectivitySample {
  double time;
  double error;        // || u_ref - u_A ||
  double estimate;     // pi(t)
  double effectivity;  // estimate / error
};

/// Compares an adaptive run (with report_times equal to the reference times) to the reference.
std::vector<EffectivitySample> effectivity(const ParametricProblem& problem, const AdaptiveResult& run,
                                           const ReferenceSolution& reference);

}  // namespace adaptsc
