#include "adaptsc/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptsc {

namespace {

std::string format_time(double t) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6g", t);
  return buffer;
}

}  // namespace

Eigen::VectorXd LinearOde::rhs(double t) const {
  if (forcing) return forcing(t);
  return Eigen::VectorXd::Zero(mass.rows());
}

Eigen::VectorXd eval_in_time(const Trajectory& trajectory, double t) {
  const auto& times = trajectory.times;
  if (times.empty() || trajectory.snapshots.size() != times.size()) {
    throw std::invalid_argument("trajectory has no recorded snapshots");
  }
  if (t < times.front() || t > times.back()) {
    throw std::out_of_range("time " + format_time(t) + " outside trajectory range [" + format_time(times.front()) +
                            ", " + format_time(times.back()) + "]");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  if (*it == t) return trajectory.snapshots[k];
  const double theta = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return trajectory.snapshots[k - 1] + theta * (trajectory.snapshots[k] - trajectory.snapshots[k - 1]);
}

Trajectory tr_fixed(const LinearOde& ode, const Eigen::VectorXd& u0, double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("fixed step must be positive");
  if (!(t1 >= t0)) throw std::invalid_argument("final time precedes initial time");
  TrAb2 stepper(ode, AdaptiveOptions{});
  Trajectory out;
  out.times.push_back(t0);
  out.snapshots.push_back(u0);
  // Step count from the ratio so that accumulated rounding cannot add a sliver step.
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  Eigen::VectorXd u = u0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ta = t0 + static_cast<double>(k) * dt;
    const double tb = (k + 1 == n) ? t1 : t0 + static_cast<double>(k + 1) * dt;
    u = stepper.tr_step(u, ta, tb - ta);
    out.times.push_back(tb);
    out.snapshots.push_back(u);
    out.steps.push_back(tb - ta);
    out.local_errors.push_back(0.0);
  }
  return out;
}

IntegratorState make_state(const Eigen::VectorXd& u0, double t0) {
  IntegratorState s;
  s.time = t0;
  s.u = u0;
  return s;
}

TrAb2::TrAb2(const LinearOde& ode, AdaptiveOptions options) : ode_(ode), options_(options) {
  if (ode.mass.rows() != ode.mass.cols() || ode.stiffness.rows() != ode.mass.rows() ||
      ode.stiffness.cols() != ode.mass.cols()) {
    throw std::invalid_argument("mass and stiffness must be square and of equal size");
  }
  if (!(options_.tolerance > 0.0)) throw std::invalid_argument("local error tolerance must be positive");
  if (!(options_.initial_step > 0.0)) throw std::invalid_argument("initial step must be positive");
}

void TrAb2::release_workspace() {
  lu_.reset();
  mass_lu_.reset();
  factored_step_ = -1.0;
}

void TrAb2::factorize(double k) {
  if (k == factored_step_) return;
  SparseMatrix lhs = ode_.mass + (0.5 * k) * ode_.stiffness;
  lhs.makeCompressed();
  if (!lu_) {
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->analyzePattern(lhs);
  }
  lu_->factorize(lhs);
  if (lu_->info() != Eigen::Success) {
    factored_step_ = -1.0;
    throw std::runtime_error("trapezoidal system matrix is singular for step " + format_time(k));
  }
  factored_step_ = k;
  ++factorizations_;
}

Eigen::VectorXd TrAb2::tr_step(const Eigen::VectorXd& u, double t, double k) {
  factorize(k);
  Eigen::VectorXd rhs = ode_.mass * u - (0.5 * k) * (ode_.stiffness * u);
  if (ode_.forcing) rhs += (0.5 * k) * (ode_.forcing(t) + ode_.forcing(t + k));
  Eigen::VectorXd out = lu_->solve(rhs);
  if (!out.allFinite()) throw std::runtime_error("trapezoidal step produced non-finite values");
  return out;
}

double TrAb2::mass_norm(const Eigen::VectorXd& v) const { return std::sqrt(std::max(0.0, v.dot(ode_.mass * v))); }

void TrAb2::start(IntegratorState& state, double t1, const StepObserver& observer, Landing landing) {
  if (!mass_lu_) {
    mass_lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    mass_lu_->compute(ode_.mass);
    if (mass_lu_->info() != Eigen::Success) throw std::runtime_error("mass matrix is singular");
  }
  state.udot_previous = mass_lu_->solve(ode_.rhs(state.time) - ode_.stiffness * state.u);
  const double k = landing == Landing::exact ? std::min(options_.initial_step, t1 - state.time) : options_.initial_step;
  const Eigen::VectorXd u_new = tr_step(state.u, state.time, k);
  state.udot = 2.0 / k * (u_new - state.u) - state.udot_previous;
  const double t_previous = state.time;
  const Eigen::VectorXd u_previous = std::move(state.u);
  state.u = u_new;
  state.time = (landing == Landing::exact && k == t1 - t_previous) ? t1 : t_previous + k;
  state.last_step = k;
  state.next_step = options_.initial_step;
  state.started = true;
  ++state.accepted;
  if (observer) observer(StepInfo{t_previous, state.time, u_previous, state.u, k, 0.0});
}

void TrAb2::advance(IntegratorState& state, double t1, const StepObserver& observer, Landing landing) {
  if (landing == Landing::overshoot && t1 <= state.time) return;
  if (t1 < state.time) throw std::invalid_argument("cannot integrate backwards in time");
  if (t1 == state.time) return;
  if (!state.started) start(state, t1, observer, landing);
  while (state.time < t1) {
    const double proposal = state.next_step;
    double k = proposal;
    bool clipped = false;
    const double remaining = t1 - state.time;
    // Stretch slightly rather than leave a sliver step before t1.
    if (landing == Landing::exact && (k >= remaining || remaining - k < 0.01 * k)) {
      k = remaining;
      clipped = true;
    }
    for (;;) {
      if (k < options_.min_step) {
        throw std::runtime_error("timestep underflow (" + format_time(k) + ") at t = " + format_time(state.time));
      }
      Eigen::VectorXd u_new = tr_step(state.u, state.time, k);
      const double ratio = k / state.last_step;
      const Eigen::VectorXd predictor =
          state.u + (0.5 * k) * ((2.0 + ratio) * state.udot - ratio * state.udot_previous);
      const double error = mass_norm(u_new - predictor) / (3.0 * (1.0 + 1.0 / ratio));
      if (!std::isfinite(error)) throw std::runtime_error("local error estimate is not finite");
      if (error > options_.tolerance) {
        k *= std::cbrt(options_.tolerance / error) * options_.safety;
        clipped = false;
        ++state.rejected;
        continue;
      }
      const double growth = error > 0.0 ? std::cbrt(options_.tolerance / error) : options_.max_growth;
      Eigen::VectorXd udot_new = 2.0 / k * (u_new - state.u) - state.udot;
      state.udot_previous = std::move(state.udot);
      state.udot = std::move(udot_new);
      const double t_previous = state.time;
      Eigen::VectorXd u_previous = std::move(state.u);
      state.u = std::move(u_new);
      state.time = clipped || (landing == Landing::exact && state.time + k >= t1) ? t1 : state.time + k;
      state.last_step = k;
      state.next_step = k * growth;
      if (clipped) state.next_step = std::max(state.next_step, proposal);
      ++state.accepted;
      if (observer) observer(StepInfo{t_previous, state.time, u_previous, state.u, k, error});
      break;
    }
  }
}

Trajectory TrAb2::solve(const Eigen::VectorXd& u0, double t0, double t1) {
  Trajectory out;
  out.tolerance = options_.tolerance;
  out.times.push_back(t0);
  if (options_.record_history) out.snapshots.push_back(u0);
  IntegratorState state = make_state(u0, t0);
  advance(state, t1, [&](const StepInfo& info) {
    out.times.push_back(info.t);
    out.steps.push_back(info.step);
    out.local_errors.push_back(info.local_error);
    if (options_.record_history) out.snapshots.push_back(info.u);
  });
  if (!options_.record_history) out.snapshots.clear();
  out.rejected = state.rejected;
  return out;
}

double global_error_estimate(const Eigen::VectorXd& fine, const Eigen::VectorXd& coarse, double tolerance,
                             double coarse_tolerance, int order, const SparseMatrix* mass) {
  if (!(coarse_tolerance >= 10.0 * tolerance)) {
    throw std::invalid_argument("coarse tolerance must be at least ten times the fine tolerance");
  }
  if (order < 1) throw std::invalid_argument("method order must be positive");
  if (fine.size() != coarse.size()) throw std::invalid_argument("solution sizes differ");
  const Eigen::VectorXd diff = fine - coarse;
  const double norm = mass ? std::sqrt(std::max(0.0, diff.dot(*mass * diff))) : diff.norm();
  return std::pow(tolerance / coarse_tolerance, static_cast<double>(order) / (order + 1)) * norm;
}

double global_error_estimate(const Trajectory& fine, const Trajectory& coarse, int order, const SparseMatrix* mass,
                             double t) {
  return global_error_estimate(eval_in_time(fine, t), eval_in_time(coarse, t), fine.tolerance, coarse.tolerance, order,
                               mass);
}

}  // namespace adaptsc
