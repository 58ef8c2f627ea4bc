#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "adaptsc/timestepper.hpp"

namespace adaptsc {

/// u' = alpha(y) u with alpha(y) = -eps + i y, u(0) = u0, y uniform on [-1,1].
struct ComplexOdeProblem {
  double epsilon = 0.1;
  double u0 = 1.0;

  std::complex<double> alpha(double y) const { return {-epsilon, y}; }
};

/// Unnormalized sinc, sin(t)/t with sinc(0) = 1.
double sinc(double t);

std::complex<double> exact_solution(const ComplexOdeProblem& problem, double t, double y);
double exact_mean(const ComplexOdeProblem& problem, double t);
double exact_stddev(const ComplexOdeProblem& problem, double t);

/// The ODE as a real 2x2 system in (Re u, Im u): M = I, A = [[eps, y], [-y, eps]].
LinearOde complex_ode_system(const ComplexOdeProblem& problem, double y);
Eigen::VectorXd embed(std::complex<double> z);
std::complex<double> unembed(const Eigen::VectorXd& v);

/// Clenshaw-Curtis quadrature on [-1,1] with n+1 nodes (n even), weights summing to 1.
struct CcQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
CcQuadrature cc_quadrature(int n);

struct InterpolationErrorSample {
  double time;
  double l2_error;       // || u - S_k u || in L2_rho, by 1025-point CC quadrature
  double mean;           // of the interpolant (real part; the imaginary part vanishes)
  double stddev;         // of the interpolant
  double mean_error;     // |E[u] - E[S_k u]|
  double stddev_error;   // |std(u) - std(S_k u)|
};

/// Interpolates the exact solution on I_k = {1, ..., k+1} (degree 2^k) at each time.
std::vector<InterpolationErrorSample> interp_error_study(const ComplexOdeProblem& problem, int k,
                                                         std::span<const double> times);

enum class TimeMethod { tr, tr_ab2 };

struct TimesteppingStudy {
  std::vector<double> times;
  std::vector<double> steps;
  std::vector<double> global_errors;  // |u(t_n) - u_n| at each accepted step
  std::size_t step_count = 0;
};

/// Integrates the ODE at fixed y with TR (control = fixed step) or TR-AB2 (control = tolerance).
TimesteppingStudy timestepping_study(const ComplexOdeProblem& problem, double y, TimeMethod method, double control,
                                     double final_time);

/// n logarithmically spaced values in [a, b], both ends included.
std::vector<double> log_spaced(double a, double b, std::size_t n);

}  // namespace adaptsc
