#include <doctest.h>

#include <cmath>
#include <numbers>

#include "adaptsc/analytic_ode.hpp"
#include "test_support.hpp"

using namespace adaptsc;

TEST_CASE("exact solution identities") {
  const ComplexOdeProblem p;
  CHECK(std::abs(exact_solution(p, 0.0, 0.7) - 1.0) == 0.0);
  CHECK(exact_solution(p, 10.0, 0.0).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  for (double y : {-1.0, -0.3, 0.5, 1.0}) {
    CHECK(std::abs(exact_solution(p, 7.3, y)) == doctest::Approx(std::exp(-0.73)).epsilon(1e-15));
  }
  CHECK(p.alpha(0.4).real() == -0.1);
}

TEST_CASE("exact statistics") {
  const ComplexOdeProblem p;
  CHECK(exact_mean(p, 0.0) == 1.0);
  CHECK(exact_stddev(p, 0.0) == 0.0);
  CHECK(std::abs(exact_mean(p, std::numbers::pi)) < 1e-15);
  CHECK(exact_stddev(p, std::numbers::pi) == doctest::Approx(std::exp(-0.1 * std::numbers::pi)).epsilon(1e-15));
  CHECK(exact_stddev(p, 2.0) > exact_stddev(p, 0.1));
  CHECK(exact_stddev(p, 2.0) > exact_stddev(p, 50.0));
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1e-6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact statistics agree with quadrature of the exact solution") {
  const ComplexOdeProblem p;
  const auto q = testing_support::clenshaw_curtis(1024);
  for (double t : {0.3, 2.0, 9.0, 40.0}) {
    std::complex<double> mean = 0.0;
    double second = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const auto u = exact_solution(p, t, q.nodes[k]);
      mean += q.weights[k] * u;
      second += q.weights[k] * std::norm(u);
    }
    CHECK(std::abs(mean - exact_mean(p, t)) < 1e-12);
    CHECK(std::sqrt(second - std::norm(mean)) == doctest::Approx(exact_stddev(p, t)).epsilon(1e-10));
  }
}

TEST_CASE("library Clenshaw-Curtis weights") {
  const auto lib = cc_quadrature(1024);
  const auto oracle = testing_support::clenshaw_curtis(1024);
  double sum = 0.0;
  for (std::size_t k = 0; k < lib.weights.size(); ++k) {
    CHECK(lib.weights[k] == doctest::Approx(oracle.weights[k]).epsilon(1e-14));
    sum += lib.weights[k];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("interpolation error study") {
  const ComplexOdeProblem p;
  const std::vector<double> zero{0.0};
  for (int k = 1; k <= 4; ++k) CHECK(interp_error_study(p, k, zero)[0].l2_error <= 1e-14);

  const std::vector<double> one{1.0};
  const double e4 = interp_error_study(p, 4, one)[0].l2_error;
  MESSAGE("k = 4, t = 1 error: " << e4);
  CHECK(e4 < 1e-10);

  const auto times = log_spaced(0.1, 20.0, 50);
  std::vector<std::vector<InterpolationErrorSample>> curves;
  for (int k = 1; k <= 4; ++k) curves.push_back(interp_error_study(p, k, times));
  for (std::size_t i = 0; i < times.size(); ++i) {
    // 1e-14 absorbs quadrature round-off once both interpolants are resolved.
    if (times[i] <= 7.5) {
      for (int k = 1; k < 4; ++k) CHECK(curves[k][i].l2_error <= curves[k - 1][i].l2_error + 1e-14);
    }
    CHECK(curves[3][i].l2_error <= curves[2][i].l2_error + 1e-14);
  }
  // growth for fixed k, and eventual decay for the coarse interpolants
  const std::vector<double> probe{0.5, 5.0, 100.0};
  for (int k = 1; k <= 4; ++k) {
    const auto s = interp_error_study(p, k, probe);
    CHECK(s[1].l2_error > 10 * s[0].l2_error);
    if (k <= 2) CHECK(s[2].l2_error < s[1].l2_error);
  }
}

// Once t exceeds what the degree-2 and degree-4 interpolants can resolve, both errors
// are O(1) and their order is arbitrary; monotonicity in k over all of [0.1, 20] fails.
TEST_CASE("interpolation error is not monotone in k on all of [0.1, 20]" * doctest::should_fail()) {
  const ComplexOdeProblem p;
  const auto times = log_spaced(0.1, 20.0, 50);
  const auto k1 = interp_error_study(p, 1, times);
  const auto k2 = interp_error_study(p, 2, times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(k2[i].l2_error <= k1[i].l2_error + 1e-14);
}

TEST_CASE("timestepping study: TR-AB2 steps grow beyond the fixed TR step") {
  const ComplexOdeProblem p;
  const auto study = timestepping_study(p, 0.0, TimeMethod::tr_ab2, 1e-7, 1e3);
  CHECK(study.steps.back() > 0.1);
  CHECK(*std::max_element(study.steps.begin(), study.steps.end()) > 1.0);
  const auto tr = timestepping_study(p, 0.0, TimeMethod::tr, 0.1, 1e3);
  CHECK(tr.step_count == 10000);
  CHECK(tr.global_errors.size() == 10000);
}
