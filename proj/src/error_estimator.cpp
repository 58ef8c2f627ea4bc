#include "adaptsc/error_estimator.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace adaptsc {

namespace {

void require_enhancement(const MultiIndexSet& base, const MultiIndexSet& enhanced) {
  if (!is_enhancement(base, enhanced)) {
    throw std::invalid_argument("index sets are not related by enhancement (I within J within I+)");
  }
}

double lookup(const ErrorEstimates& ge, const GridPoint& z) {
  const auto it = ge.find(z);
  if (it == ge.end()) throw std::invalid_argument("missing global error estimate for a collocation point");
  return it->second;
}

double weighted_sum(const ErrorEstimates& ge, const std::map<GridPoint, double>& weights) {
  double total = 0.0;
  for (const auto& [z, w] : weights) total += lookup(ge, z) * w;
  return total;
}

double sum_of(const std::map<GridPoint, double>& weights) {
  double total = 0.0;
  for (const auto& [z, w] : weights) total += w;
  return total;
}

}  // namespace

bool is_enhancement(const MultiIndexSet& base, const MultiIndexSet& enhanced) {
  if (base.dim() != enhanced.dim()) return false;
  for (const auto& nu : base) {
    if (!enhanced.contains(nu)) return false;
  }
  const MultiIndexSet full = base.enhance();
  for (const auto& nu : enhanced) {
    if (!full.contains(nu)) return false;
  }
  return true;
}

double interpolation_estimate(const SparseInterpolant& u_base, const SparseInterpolant& u_enhanced,
                              const SparseMatrix* mass) {
  require_enhancement(u_base.index_set(), u_enhanced.index_set());
  return difference_norm(u_enhanced, u_base, mass);
}

double interpolation_estimate(const PointValues& values, const MultiIndexSet& base, const MultiIndexSet& enhanced,
                              const SparseMatrix* mass) {
  require_enhancement(base, enhanced);
  const auto weights = coefficient_difference(enhanced, base);
  if (weights.empty()) return 0.0;
  return combination_norm(weights, values, mass);
}

double indicator(const PointValues& values, const MultiIndexSet& base, const MultiIndex& mu, const SparseMatrix* mass) {
  if (base.contains(mu) || !can_extend(base, mu)) {
    throw std::invalid_argument("indicator index " + mu.to_string() + " is not in the reduced margin");
  }
  return combination_norm(surplus_weights(mu), values, mass);
}

std::map<MultiIndex, double> indicators(const PointValues& values, const MultiIndexSet& base,
                                        const SparseMatrix* mass) {
  std::map<MultiIndex, double> out;
  for (const auto& mu : base.reduced_margin()) out.emplace(mu, indicator(values, base, mu, mass));
  return out;
}

double EstimatorWeights::correction_sum() const { return sum_of(correction); }
double EstimatorWeights::timestepping_sum() const { return sum_of(timestepping); }

EstimatorWeights estimator_weights(const MultiIndexSet& base, const MultiIndexSet& enhanced) {
  require_enhancement(base, enhanced);
  const auto c_base = combination_coefficients(base);
  const auto c_enhanced = combination_coefficients(enhanced);
  const auto c_diff = coefficient_difference(enhanced, base);
  const std::vector<GridPoint> base_points = sparse_points(base);
  const std::set<GridPoint> old_points(base_points.begin(), base_points.end());

  EstimatorWeights w;
  for (const auto& z : base_points) {
    w.timestepping.emplace(z, weighted_lagrange_norm(c_base, z));
    w.correction.emplace(z, weighted_lagrange_norm(c_diff, z));
  }
  for (const auto& z : sparse_points(enhanced)) {
    if (old_points.count(z)) continue;
    w.correction.emplace(z, weighted_lagrange_norm(c_enhanced, z));
  }
  return w;
}

double correction_estimate(const ErrorEstimates& ge, const EstimatorWeights& weights) {
  return weighted_sum(ge, weights.correction);
}

double correction_estimate(const ErrorEstimates& ge, const MultiIndexSet& base, const MultiIndexSet& enhanced) {
  return correction_estimate(ge, estimator_weights(base, enhanced));
}

double correction_estimate(double shared_ge, const MultiIndexSet& base, const MultiIndexSet& enhanced) {
  return shared_ge * estimator_weights(base, enhanced).correction_sum();
}

double timestepping_estimate(const ErrorEstimates& ge, const EstimatorWeights& weights) {
  return weighted_sum(ge, weights.timestepping);
}

double timestepping_estimate(const ErrorEstimates& ge, const MultiIndexSet& base) {
  const auto c = combination_coefficients(base);
  double total = 0.0;
  for (const auto& z : sparse_points(base)) total += lookup(ge, z) * weighted_lagrange_norm(c, z);
  return total;
}

double timestepping_estimate(double shared_ge, const MultiIndexSet& base) {
  const auto c = combination_coefficients(base);
  double total = 0.0;
  for (const auto& z : sparse_points(base)) total += weighted_lagrange_norm(c, z);
  return shared_ge * total;
}

double total_estimate(double interpolation, double correction, double timestepping) {
  return interpolation + correction + timestepping;
}

}  // namespace adaptsc
