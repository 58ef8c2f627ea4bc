#include <doctest.h>

#include <cmath>
#include <random>

#include "adaptsc/analytic_ode.hpp"
#include "adaptsc/fem_assembly.hpp"
#include "adaptsc/timestepper.hpp"

using namespace adaptsc;

namespace {

LinearOde scalar_ode(double a, std::function<Eigen::VectorXd(double)> f = {}) {
  LinearOde ode;
  ode.mass.resize(1, 1);
  ode.mass.insert(0, 0) = 1.0;
  ode.stiffness.resize(1, 1);
  ode.stiffness.insert(0, 0) = a;
  ode.forcing = std::move(f);
  return ode;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("single TR step on a decaying scalar ODE") {
  const double alpha = -0.1;
  const auto ode = scalar_ode(-alpha);
  const auto traj = tr_fixed(ode, scalar(1.0), 0.0, 0.1, 0.1);
  REQUIRE(traj.step_count() == 1);
  CHECK(traj.snapshots.back()(0) == doctest::Approx((1 + alpha * 0.05) / (1 - alpha * 0.05)).epsilon(1e-15));
  CHECK(traj.snapshots.back()(0) == doctest::Approx(0.99004975124).epsilon(1e-10));
}

TEST_CASE("zero data stays zero") {
  const auto ode = scalar_ode(3.0);
  const auto traj = tr_fixed(ode, scalar(0.0), 0.0, 2.0, 0.3);
  for (const auto& u : traj.snapshots) CHECK(u(0) == 0.0);
  CHECK(traj.times.back() == 2.0);
  CHECK(traj.step_count() == 7);
  AdaptiveOptions options;
  options.tolerance = 1e-6;
  TrAb2 stepper(ode, options);
  const auto adaptive = stepper.solve(scalar(0.0), 0.0, 10.0);
  CHECK(adaptive.times.back() == 10.0);
  CHECK(adaptive.step_count() < 10);
}

TEST_CASE("TR on the complex ODE with a fixed step takes exactly 1e4 steps") {
  const ComplexOdeProblem problem;
  const auto traj = tr_fixed(complex_ode_system(problem, 1.0), embed(1.0), 0.0, 1e3, 0.1);
  CHECK(traj.step_count() == 10000);
  CHECK(traj.times.back() == 1e3);
}

TEST_CASE("TR-AB2 step counts on the complex ODE") {
  const ComplexOdeProblem problem;
  for (double y : {0.0, 1.0}) {
    AdaptiveOptions options;
    options.tolerance = 1e-7;
    const LinearOde ode = complex_ode_system(problem, y);
    TrAb2 stepper(ode, options);
    const auto traj = stepper.solve(embed(1.0), 0.0, 1e3);
    MESSAGE("y = " << y << ": " << traj.step_count() << " steps, " << traj.rejected << " rejections");
    if (y == 0.0) {
      CHECK(traj.step_count() >= 150);
      CHECK(traj.step_count() <= 600);
    } else {
      CHECK(traj.step_count() >= 1500);
      CHECK(traj.step_count() <= 6000);
    }
    for (double e : traj.local_errors) CHECK(e <= 1e-7);
    CHECK(traj.times.back() == 1e3);
  }
}

TEST_CASE("TR is exact on linear solutions and the controller keeps growing the step") {
  // u = 2 + 3t solves u' + u = 3 + 2 + 3t.
  const auto ode = scalar_ode(1.0, [](double t) { return scalar(5.0 + 3.0 * t); });
  AdaptiveOptions options;
  options.tolerance = 1e-6;
  options.record_history = true;
  TrAb2 stepper(ode, options);
  const auto traj = stepper.solve(scalar(2.0), 0.0, 50.0);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.snapshots[k](0) == doctest::Approx(2.0 + 3.0 * traj.times[k]).epsilon(1e-12));
  }
  // Only round-off remains; it enters through the derivative recurrence started at k = 1e-9.
  for (double e : traj.local_errors) CHECK(e <= 1e-2 * options.tolerance);
  for (std::size_t k = 1; k + 1 < traj.steps.size(); ++k) CHECK(traj.steps[k] >= traj.steps[k - 1]);
}

TEST_CASE("eval_in_time") {
  Trajectory traj;
  traj.times = {0.0, 1.0, 3.0};
  traj.snapshots = {scalar(1.0), scalar(2.0), scalar(6.0)};
  CHECK(eval_in_time(traj, 1.0)(0) == 2.0);
  CHECK(eval_in_time(traj, 0.0)(0) == 1.0);
  CHECK(eval_in_time(traj, 2.0)(0) == doctest::Approx(4.0));
  CHECK(eval_in_time(traj, 0.5)(0) == doctest::Approx(1.5));
  CHECK_THROWS(eval_in_time(traj, 3.5));
  CHECK_THROWS(eval_in_time(traj, -0.1));
  Trajectory flat;
  flat.times = {0.0, 0.5, 2.0};
  flat.snapshots = {scalar(7.0), scalar(7.0), scalar(7.0)};
  for (double t : {0.0, 0.3, 1.1, 2.0}) CHECK(eval_in_time(flat, t)(0) == 7.0);
}

TEST_CASE("global error estimate scaling") {
  const Eigen::VectorXd a = Eigen::Vector2d(1.0, 0.0);
  const Eigen::VectorXd b = Eigen::Vector2d(0.0, 0.0);
  CHECK(global_error_estimate(a, b, 1e-5, 1e-3, 2, nullptr) == doctest::Approx(4.6416e-2).epsilon(1e-4));
  CHECK(global_error_estimate(a, a, 1e-5, 1e-3, 2, nullptr) == 0.0);
  CHECK_THROWS(global_error_estimate(a, b, 1e-5, 1e-5, 2, nullptr));
  CHECK_THROWS(global_error_estimate(a, b, 1e-5, 5e-5, 2, nullptr));
}

TEST_CASE("global error estimate tracks the true error on the complex ODE") {
  const ComplexOdeProblem problem;
  for (double y : {0.0, 1.0}) {
    const LinearOde ode = complex_ode_system(problem, y);
    AdaptiveOptions fine_options;
    fine_options.tolerance = 1e-5;
    fine_options.record_history = true;
    AdaptiveOptions coarse_options = fine_options;
    coarse_options.tolerance = 1e-3;
    TrAb2 fine_stepper(ode, fine_options);
    TrAb2 coarse_stepper(ode, coarse_options);
    const auto fine = fine_stepper.solve(embed(1.0), 0.0, 100.0);
    const auto coarse = coarse_stepper.solve(embed(1.0), 0.0, 100.0);
    // Pointwise ratios are meaningless where the oscillating error crosses zero, so
    // compare the peak estimate and peak true error over ten log-spaced windows.
    const auto edges = log_spaced(0.1, 100.0, 11);
    for (std::size_t w = 0; w + 1 < edges.size(); ++w) {
      double peak_estimate = 0.0;
      double peak_truth = 0.0;
      for (const double t : log_spaced(edges[w], edges[w + 1], 25)) {
        peak_estimate = std::max(peak_estimate, global_error_estimate(fine, coarse, 2, &ode.mass, t));
        peak_truth =
            std::max(peak_truth, std::abs(exact_solution(problem, t, y) - unembed(eval_in_time(fine, t))));
      }
      CHECK(peak_estimate <= 10 * peak_truth);
      CHECK(peak_truth <= 10 * peak_estimate);
    }
  }
}

TEST_CASE("TR converges at second order") {
  const ComplexOdeProblem problem;
  const LinearOde ode = complex_ode_system(problem, 1.0);
  auto error = [&](double dt) {
    const auto traj = tr_fixed(ode, embed(1.0), 0.0, 1.0, dt);
    return std::abs(exact_solution(problem, 1.0, 1.0) - unembed(traj.snapshots.back()));
  };
  for (double dt : {0.1, 0.05, 0.025}) {
    const double ratio = error(dt) / error(dt / 2);
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
  }
}

TEST_CASE("accepted steps meet the local tolerance against a halved-substep reference") {
  const SpatialMesh mesh(3);
  Assembler assembler(mesh, make_four_quadrant_wind(0.5), 0.1, HotWall{0.1});
  const std::vector<double> y{0.4, -0.8, 0.1, 0.9};
  const auto sys = assembler.assemble(y);
  LinearOde ode{sys.mass, sys.stiffness(), [&sys](double t) { return sys.forcing(t); }};
  const double tol = 1e-5;
  AdaptiveOptions options;
  options.tolerance = tol;
  TrAb2 stepper(ode, options);
  TrAb2 reference(ode, options);
  IntegratorState state = make_state(Eigen::VectorXd::Zero(sys.mass.rows()), 0.0);
  int checked = 0;
  double worst = 0.0;
  stepper.advance(state, 5.0, [&](const StepInfo& info) {
    if (info.local_error == 0.0) return;  // unconditionally accepted start-up step
    const double h = info.step / 2;
    const Eigen::VectorXd half = reference.tr_step(reference.tr_step(info.u_previous, info.t_previous, h),
                                                   info.t_previous + h, h);
    // TR local errors scale as k^3: one step minus two half steps is 3/4 of the full-step error.
    const Eigen::VectorXd diff = (info.u - half) * (4.0 / 3.0);
    const double local = std::sqrt(diff.dot(sys.mass * diff));
    worst = std::max(worst, local / tol);
    CHECK(local <= 5 * tol);
    ++checked;
  });
  MESSAGE("worst recomputed local error / tol = " << worst << " over " << checked << " steps");
  CHECK(checked > 10);
}

TEST_CASE("perturbations of the initial state decay for the double-glazing problem") {
  const SpatialMesh mesh(3);
  Assembler assembler(mesh, make_four_quadrant_wind(0.5), 0.1, HotWall{0.1});
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g;
  for (int seed = 0; seed < 5; ++seed) {
    std::vector<double> y(4);
    for (auto& v : y) v = u(rng);
    const auto sys = assembler.assemble(y);
    LinearOde ode{sys.mass, sys.stiffness(), [&sys](double t) { return sys.forcing(t); }};
    Eigen::VectorXd p(sys.mass.rows());
    for (auto& v : p) v = g(rng);
    p /= std::sqrt(p.dot(sys.mass * p));
    AdaptiveOptions options;
    options.tolerance = 1e-5;
    TrAb2 first(ode, options);
    TrAb2 second(ode, options);
    IntegratorState a = make_state(Eigen::VectorXd::Zero(p.size()), 0.0);
    IntegratorState b = make_state(p, 0.0);
    first.advance(a, 50.0);
    second.advance(b, 50.0);
    const Eigen::VectorXd d = a.u - b.u;
    CHECK(std::sqrt(d.dot(sys.mass * d)) < 1e-3);
  }
}

TEST_CASE("step counts scale like tol^(-1/3)") {
  const ComplexOdeProblem problem;
  for (double y : {0.0, 1.0}) {
    std::vector<double> logs;
    std::vector<double> logn;
    for (double tol : {1e-4, 1e-5, 1e-6}) {
      const auto study = timestepping_study(problem, y, TimeMethod::tr_ab2, tol, 1e3);
      logs.push_back(std::log(tol));
      logn.push_back(std::log(static_cast<double>(study.step_count)));
    }
    const double mx = (logs[0] + logs[1] + logs[2]) / 3;
    const double my = (logn[0] + logn[1] + logn[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (logs[i] - mx) * (logn[i] - my);
      sxx += (logs[i] - mx) * (logs[i] - mx);
    }
    const double slope = sxy / sxx;
    MESSAGE("y = " << y << ": exponent " << slope);
    CHECK(slope >= -0.45);
    CHECK(slope <= -0.22);
  }
}

TEST_CASE("timestep underflow is reported") {
  const auto ode = scalar_ode(1e6, [](double t) { return scalar(std::sin(1e5 * t)); });
  AdaptiveOptions options;
  options.tolerance = 1e-14;
  options.min_step = 1e-6;
  TrAb2 stepper(ode, options);
  CHECK_THROWS_AS(stepper.solve(scalar(1.0), 0.0, 1.0), std::runtime_error);
}

TEST_CASE("overshoot landing keeps the natural step sequence") {
  const LinearOde ode = complex_ode_system(ComplexOdeProblem{}, 1.0);
  AdaptiveOptions options;
  options.tolerance = 1e-6;
  TrAb2 free_run(ode, options);
  TrAb2 chunked(ode, options);
  IntegratorState a = make_state(embed(1.0), 0.0);
  IntegratorState b = make_state(embed(1.0), 0.0);
  std::vector<double> ta, tb;
  free_run.advance(a, 3.0, [&](const StepInfo& info) { ta.push_back(info.t); }, Landing::overshoot);
  for (double t1 = 0.25; t1 <= 3.0; t1 += 0.25) {
    chunked.advance(b, t1, [&](const StepInfo& info) { tb.push_back(info.t); }, Landing::overshoot);
    CHECK(b.time >= t1);
  }
  CHECK(a.time >= 3.0);
  REQUIRE(ta.size() == tb.size());
  for (std::size_t k = 0; k < ta.size(); ++k) CHECK(ta[k] == tb[k]);
  // Already past the target: nothing happens.
  const std::size_t before = b.accepted;
  chunked.advance(b, 0.5, {}, Landing::overshoot);
  CHECK(b.accepted == before);
}
