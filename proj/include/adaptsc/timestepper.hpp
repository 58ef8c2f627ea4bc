#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace adaptsc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// M u' + A u = f(t).
struct LinearOde {
  SparseMatrix mass;
  SparseMatrix stiffness;
  /// Empty means f = 0.
  std::function<Eigen::VectorXd(double)> forcing;

  Eigen::VectorXd rhs(double t) const;
};

/// Time grid and snapshots produced by an integrator. Snapshots are optional for the
/// adaptive integrator (see AdaptiveOptions::record_history).
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> snapshots;
  std::vector<double> steps;          // steps[k] = times[k+1] - times[k]
  std::vector<double> local_errors;   // per accepted step, zero for fixed-step TR
  double tolerance = 0.0;
  std::size_t rejected = 0;

  std::size_t step_count() const { return steps.size(); }
};

/// Piecewise-linear reconstruction between stored snapshots.
Eigen::VectorXd eval_in_time(const Trajectory& trajectory, double t);

/// Trapezoidal rule with constant step; the last step is shortened to land on t1.
Trajectory tr_fixed(const LinearOde& ode, const Eigen::VectorXd& u0, double t0, double t1, double dt);

struct AdaptiveOptions {
  double tolerance = 1e-5;
  double initial_step = 1e-9;
  double safety = 0.9;         // applied to the retry step after a rejection
  double min_step = 1e-14;
  double max_growth = 1e4;     // only used when the error estimate is exactly zero
  bool record_history = false;
};

/// Everything needed to resume TR-AB2: the solution, its TR derivative at the last two
/// accepted steps, and the step proposal.
struct IntegratorState {
  double time = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd udot;
  Eigen::VectorXd udot_previous;
  double last_step = 0.0;
  double next_step = 0.0;
  bool started = false;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

IntegratorState make_state(const Eigen::VectorXd& u0, double t0);

struct StepInfo {
  double t_previous;
  double t;
  const Eigen::VectorXd& u_previous;
  const Eigen::VectorXd& u;
  double step;
  double local_error;
};

using StepObserver = std::function<void(const StepInfo&)>;

/// exact: the last step is shortened (or slightly stretched) to end on t1.
/// overshoot: steps keep their natural size and the last one ends at or after t1.
enum class Landing { exact, overshoot };

/// Adaptive TR-AB2 with local error control in the M-norm.
///
/// Local error estimate e = ||u_AB2 - u_TR||_M / (3 (1 + k_old / k)). Accepted steps
/// satisfy e <= tolerance and propose k (tol / e)^{1/3}; rejected steps retry with the
/// same factor times the safety factor. A cold state first takes one TR step of the
/// initial size, accepted without a test, to build the two-step history.
class TrAb2 {
 public:
  TrAb2(const LinearOde& ode, AdaptiveOptions options);

  const AdaptiveOptions& options() const { return options_; }

  /// Integrates `state` up to t1. The observer sees each accepted step.
  void advance(IntegratorState& state, double t1, const StepObserver& observer = {}, Landing landing = Landing::exact);

  /// Convenience: integrate from (t0, u0) and return the trajectory.
  Trajectory solve(const Eigen::VectorXd& u0, double t0, double t1);

  /// One trapezoidal step: (M + k/2 A) u_new = (M - k/2 A) u + k/2 (f(t) + f(t + k)).
  Eigen::VectorXd tr_step(const Eigen::VectorXd& u, double t, double k);

  std::size_t factorizations() const { return factorizations_; }

  /// Frees the cached factorizations; the next step rebuilds them.
  void release_workspace();

 private:
  void start(IntegratorState& state, double t1, const StepObserver& observer, Landing landing);
  void factorize(double k);
  double mass_norm(const Eigen::VectorXd& v) const;

  const LinearOde& ode_;
  AdaptiveOptions options_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  double factored_step_ = -1.0;
  std::size_t factorizations_ = 0;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> mass_lu_;
};

/// ||fine - coarse||_M scaled by (tol / coarse_tol)^{p/(p+1)}. Mass may be null.
double global_error_estimate(const Eigen::VectorXd& fine, const Eigen::VectorXd& coarse, double tolerance,
                             double coarse_tolerance, int order, const SparseMatrix* mass);
double global_error_estimate(const Trajectory& fine, const Trajectory& coarse, int order, const SparseMatrix* mass,
                             double t);

}  // namespace adaptsc
