#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "adaptsc/multi_index.hpp"

namespace adaptsc {

using SparseMatrix = Eigen::SparseMatrix<double>;

// One-dimensional Clenshaw-Curtis nodes are identified by an integer key on a
// dyadic grid of resolution 2^30 over [0,1]. Keys are level independent, so nested
// rules share keys and coordinates are generated bit-identically from the key.
using NodeKey = std::uint32_t;

inline constexpr int kMaxRuleLevel = 31;

/// Number of points of the level-`level` rule: 1, then 2^(level-1) + 1.
int rule_size(int level);
NodeKey node_key(int level, int index);
double node_coordinate(NodeKey key);
/// Position of `key` within the level-`level` rule, or -1 if absent.
int node_index(int level, NodeKey key);

struct OneDimRule {
  int level = 1;
  std::vector<double> points;  // ascending
  std::vector<NodeKey> keys;
  std::vector<double> barycentric_weights;

  std::size_t size() const { return points.size(); }
  /// Values of all Lagrange basis polynomials of this rule at y.
  std::vector<double> basis(double y) const;
};

/// Nested Clenshaw-Curtis rule of the given level.
OneDimRule cc_points(int level);
/// Cached, shared instance of cc_points(level).
const OneDimRule& cc_rule(int level);

/// Orthonormal Legendre coefficients of the level's Lagrange basis under rho = 1/2:
/// entry (j, p) is the integral of l_j * P_p. Cached.
const Eigen::MatrixXd& legendre_transform(int level);
/// Gram matrix of two levels' Lagrange bases under rho = 1/2. Cached.
const Eigen::MatrixXd& lagrange_gram(int level_a, int level_b);

enum class Density { uniform };

/// Point of a sparse grid, stored as one node key per dimension.
struct GridPoint {
  std::vector<NodeKey> keys;

  std::size_t dim() const { return keys.size(); }
  std::vector<double> coordinates() const;

  auto operator<=>(const GridPoint&) const = default;
  bool operator==(const GridPoint&) const = default;
};

GridPoint point_from_coordinates(std::span<const double> y);
/// The origin (all level-1 nodes).
GridPoint center_point(std::size_t dim);
/// True if every coordinate of `z` belongs to the rule of the matching level.
bool in_tensor_grid(const MultiIndex& index, const GridPoint& z);

std::vector<GridPoint> tensor_points(const MultiIndex& index);
/// Union of all tensor grids of the set, lexicographically ordered.
std::vector<GridPoint> sparse_points(const MultiIndexSet& set);

/// c_nu = sum over z in {0,1}^d with nu + z in I of (-1)^|z|. Includes zero entries.
std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set);
/// Nonzero weights of the hierarchical surplus of `index` in terms of tensor interpolants.
std::map<MultiIndex, int> surplus_weights(const MultiIndex& index);
/// Nonzero entries of c(a) - c(b).
std::map<MultiIndex, int> coefficient_difference(const MultiIndexSet& a, const MultiIndexSet& b);

using PointValues = std::map<GridPoint, Eigen::VectorXd>;
using LegendreKey = std::vector<int>;

/// Sparse-grid polynomial with vector coefficients in the orthonormal Legendre basis
/// of L2_rho([-1,1]^d). Parametric L2 norms become sums of squares.
class LegendreExpansion {
 public:
  LegendreExpansion() = default;

  void add(const LegendreKey& key, double weight, const Eigen::Ref<const Eigen::VectorXd>& coefficient);
  void add(const LegendreExpansion& other, double weight);

  const std::map<LegendreKey, Eigen::VectorXd>& terms() const { return terms_; }
  Eigen::Index value_size() const { return value_size_; }

  /// Integral against rho: the constant term.
  Eigen::VectorXd mean() const;
  /// Componentwise variance.
  Eigen::VectorXd variance() const;
  /// || . ||^2 in L2_rho x (mass-weighted coefficient space). Empty mass means identity.
  double squared_norm(const SparseMatrix* mass) const;

 private:
  std::map<LegendreKey, Eigen::VectorXd> terms_;
  Eigen::Index value_size_ = 0;
};

/// Expansion of sum_nu weight_nu * U^nu[values] (tensor interpolants of the data).
LegendreExpansion legendre_expansion(const std::map<MultiIndex, int>& weights, const PointValues& values);

/// Norm of sum_nu weight_nu * U^nu[values] in L2_rho x L2(D) (mass may be null).
double combination_norm(const std::map<MultiIndex, int>& weights, const PointValues& values,
                        const SparseMatrix* mass);

/// Combination-technique sparse interpolant with vector-valued data.
class SparseInterpolant {
 public:
  SparseInterpolant(MultiIndexSet set, const PointValues& values, double time = 0.0);

  const MultiIndexSet& index_set() const { return set_; }
  const std::map<MultiIndex, int>& coefficients() const { return coefficients_; }
  const std::vector<GridPoint>& points() const { return points_; }
  const PointValues& values() const { return values_; }
  const Eigen::VectorXd& value_at(const GridPoint& z) const;
  double time() const { return time_; }
  std::size_t dim() const { return set_.dim(); }
  Eigen::Index value_size() const;

  Eigen::VectorXd evaluate(std::span<const double> y) const;
  LegendreExpansion expansion() const;

 private:
  MultiIndexSet set_;
  std::map<MultiIndex, int> coefficients_;
  std::vector<GridPoint> points_;
  PointValues values_;
  double time_;
};

/// Exact L2_rho norm of sum_nu weight_nu * (tensor Lagrange polynomial of z at nu).
double weighted_lagrange_norm(const std::map<MultiIndex, int>& weights, const GridPoint& z);
/// || L_z^I ||, z must be a point of the sparse grid of I.
double lagrange_norm(const MultiIndexSet& set, const GridPoint& z, Density density = Density::uniform);
/// || L_z^A - L_z^B ||.
double lagrange_difference_norm(const MultiIndexSet& a, const MultiIndexSet& b, const GridPoint& z,
                                Density density = Density::uniform);

/// || a - b || in L2_rho x L2(D). Mass may be null for the Euclidean inner product.
double difference_norm(const SparseInterpolant& a, const SparseInterpolant& b, const SparseMatrix* mass);

}  // namespace adaptsc
