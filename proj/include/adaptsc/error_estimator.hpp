#pragma once

#include <cstddef>
#include <map>

#include "adaptsc/multi_index.hpp"
#include "adaptsc/sparse_grid.hpp"

namespace adaptsc {

/// Estimated global timestepping error per collocation point.
using ErrorEstimates = std::map<GridPoint, double>;

struct EstimatorReport {
  double time = 0.0;
  double interpolation = 0.0;                  // pi_I
  std::map<MultiIndex, double> indicators;     // pi_{I,mu} for mu in the reduced margin
  double correction = 0.0;                     // pi_{I,delta}
  double timestepping = 0.0;                   // pi_delta
  double total = 0.0;
  double tolerance = 0.0;                      // eta_I = c_safety * pi_{I,delta}
  std::size_t n_colloc = 0;                    // |X(I)|
  std::size_t n_colloc_enhanced = 0;           // |X(I+)|
};

/// True when I is contained in J and J in enhance(I).
bool is_enhancement(const MultiIndexSet& base, const MultiIndexSet& enhanced);

/// ||u_{I+} - u_I||. Both interpolants must carry the same time tag.
double interpolation_estimate(const SparseInterpolant& u_base, const SparseInterpolant& u_enhanced,
                              const SparseMatrix* mass);

/// Same quantity from point values covering X(I+).
double interpolation_estimate(const PointValues& values, const MultiIndexSet& base, const MultiIndexSet& enhanced,
                              const SparseMatrix* mass);

/// ||S_{I u mu} - S_I||, which is the norm of the hierarchical surplus of mu.
double indicator(const PointValues& values, const MultiIndexSet& base, const MultiIndex& mu, const SparseMatrix* mass);

/// Indicators for every member of the reduced margin.
std::map<MultiIndex, double> indicators(const PointValues& values, const MultiIndexSet& base,
                                        const SparseMatrix* mass);

/// Lagrange norm factors multiplying the per-point global error estimates.
struct EstimatorWeights {
  std::map<GridPoint, double> correction;    // ||L^{I+}_z|| (new z) or ||L^{I+}_z - L^I_z|| (old z)
  std::map<GridPoint, double> timestepping;  // ||L^I_z|| for z in X(I)

  double correction_sum() const;
  double timestepping_sum() const;
};

EstimatorWeights estimator_weights(const MultiIndexSet& base, const MultiIndexSet& enhanced);

double correction_estimate(const ErrorEstimates& ge, const EstimatorWeights& weights);
double correction_estimate(const ErrorEstimates& ge, const MultiIndexSet& base, const MultiIndexSet& enhanced);
/// One estimate shared by every point.
double correction_estimate(double shared_ge, const MultiIndexSet& base, const MultiIndexSet& enhanced);

double timestepping_estimate(const ErrorEstimates& ge, const EstimatorWeights& weights);
double timestepping_estimate(const ErrorEstimates& ge, const MultiIndexSet& base);
double timestepping_estimate(double shared_ge, const MultiIndexSet& base);

double total_estimate(double interpolation, double correction, double timestepping);

}  // namespace adaptsc
