#include "adaptsc/analytic_ode.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "adaptsc/sparse_grid.hpp"

namespace adaptsc {

double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

std::complex<double> exact_solution(const ComplexOdeProblem& problem, double t, double y) {
  return problem.u0 * std::exp(-problem.epsilon * t) * std::polar(1.0, y * t);
}

double exact_mean(const ComplexOdeProblem& problem, double t) {
  return problem.u0 * std::exp(-problem.epsilon * t) * sinc(t);
}

double exact_stddev(const ComplexOdeProblem& problem, double t) {
  const double s = sinc(t);
  return problem.u0 * std::exp(-problem.epsilon * t) * std::sqrt(std::max(0.0, 1.0 - s * s));
}

LinearOde complex_ode_system(const ComplexOdeProblem& problem, double y) {
  LinearOde ode;
  ode.mass.resize(2, 2);
  ode.mass.insert(0, 0) = 1.0;
  ode.mass.insert(1, 1) = 1.0;
  ode.mass.makeCompressed();
  ode.stiffness.resize(2, 2);
  ode.stiffness.insert(0, 0) = problem.epsilon;
  ode.stiffness.insert(0, 1) = y;
  ode.stiffness.insert(1, 0) = -y;
  ode.stiffness.insert(1, 1) = problem.epsilon;
  ode.stiffness.makeCompressed();
  return ode;
}

Eigen::VectorXd embed(std::complex<double> z) { return Eigen::Vector2d(z.real(), z.imag()); }

std::complex<double> unembed(const Eigen::VectorXd& v) { return {v(0), v(1)}; }

CcQuadrature cc_quadrature(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("Clenshaw-Curtis order must be even and positive");
  CcQuadrature q;
  for (int k = 0; k <= n; ++k) {
    const double theta = std::numbers::pi * k / n;
    q.nodes.push_back(-std::cos(theta));
    double s = 0.0;
    for (int j = 1; j <= n / 2; ++j) {
      const double b = (j == n / 2) ? 1.0 : 2.0;
      s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * theta);
    }
    const double c = (k == 0 || k == n) ? 1.0 : 2.0;
    q.weights.push_back(0.5 * c / n * (1.0 - s));
  }
  return q;
}

std::vector<InterpolationErrorSample> interp_error_study(const ComplexOdeProblem& problem, int k,
                                                         std::span<const double> times) {
  if (k < 1 || k > 10) throw std::invalid_argument("level exponent k must lie in [1, 10]");
  MultiIndexSet set(1);
  for (int level = 1; level <= k + 1; ++level) set = set.with(MultiIndex{level});
  const auto points = sparse_points(set);
  static const CcQuadrature quadrature = cc_quadrature(1024);

  std::vector<InterpolationErrorSample> out;
  for (double t : times) {
    PointValues values;
    for (const auto& z : points) values.emplace(z, embed(exact_solution(problem, t, z.coordinates()[0])));
    const SparseInterpolant interp(set, values, t);
    double squared = 0.0;
    for (std::size_t q = 0; q < quadrature.nodes.size(); ++q) {
      const double y = quadrature.nodes[q];
      const std::complex<double> diff = exact_solution(problem, t, y) - unembed(interp.evaluate(std::span(&y, 1)));
      squared += quadrature.weights[q] * std::norm(diff);
    }
    const LegendreExpansion expansion = interp.expansion();
    const Eigen::VectorXd mean = expansion.mean();
    const double stddev = std::sqrt(expansion.variance().sum());
    InterpolationErrorSample sample;
    sample.time = t;
    sample.l2_error = std::sqrt(squared);
    sample.mean = mean(0);
    sample.stddev = stddev;
    sample.mean_error = std::abs(std::complex<double>(mean(0), mean(1)) - exact_mean(problem, t));
    sample.stddev_error = std::abs(stddev - exact_stddev(problem, t));
    out.push_back(sample);
  }
  return out;
}

TimesteppingStudy timestepping_study(const ComplexOdeProblem& problem, double y, TimeMethod method, double control,
                                     double final_time) {
  const LinearOde ode = complex_ode_system(problem, y);
  const Eigen::VectorXd u0 = embed(problem.u0);
  TimesteppingStudy out;
  auto record = [&](double t, const Eigen::VectorXd& u) {
    out.times.push_back(t);
    out.global_errors.push_back(std::abs(exact_solution(problem, t, y) - unembed(u)));
  };
  if (method == TimeMethod::tr) {
    const Trajectory trajectory = tr_fixed(ode, u0, 0.0, final_time, control);
    for (std::size_t n = 1; n < trajectory.times.size(); ++n) record(trajectory.times[n], trajectory.snapshots[n]);
    out.steps = trajectory.steps;
  } else {
    AdaptiveOptions options;
    options.tolerance = control;
    TrAb2 stepper(ode, options);
    IntegratorState state = make_state(u0, 0.0);
    stepper.advance(state, final_time, [&](const StepInfo& info) {
      record(info.t, info.u);
      out.steps.push_back(info.step);
    });
  }
  out.step_count = out.steps.size();
  return out;
}

std::vector<double> log_spaced(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > a) || n < 2) throw std::invalid_argument("log_spaced needs 0 < a < b and n >= 2");
  std::vector<double> out(n);
  const double la = std::log(a);
  const double lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = a;
  out.back() = b;
  return out;
}

}  // namespace adaptsc
