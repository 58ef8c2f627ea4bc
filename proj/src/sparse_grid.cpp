#include "adaptsc/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include <gsl/gsl_integration.h>

namespace adaptsc {

namespace {

constexpr NodeKey kResolution = NodeKey{1} << 30;
constexpr NodeKey kCenterKey = kResolution / 2;

void check_level(int level) {
  if (level < 1 || level > kMaxRuleLevel) {
    throw std::invalid_argument("rule level must lie in [1, " + std::to_string(kMaxRuleLevel) + "], got " +
                                std::to_string(level));
  }
}

// Orthonormal Legendre polynomial under the uniform density on [-1,1].
double legendre_orthonormal(int degree, double x) {
  return std::sqrt(2.0 * degree + 1.0) * std::legendre(static_cast<unsigned>(degree), x);
}

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1 (density 1/2 folded in)
};

GaussLegendre gauss_legendre(std::size_t n) {
  GaussLegendre rule;
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
  if (table == nullptr) throw std::runtime_error("failed to allocate Gauss-Legendre table");
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(-1.0, 1.0, i, &rule.nodes[i], &rule.weights[i], table);
    rule.weights[i] *= 0.5;
  }
  gsl_integration_glfixed_table_free(table);
  return rule;
}

// Iterates the lexicographic odometer over per-dimension extents.
bool advance(std::vector<int>& counter, const std::vector<int>& extents) {
  for (std::size_t i = counter.size(); i-- > 0;) {
    if (++counter[i] < extents[i]) return true;
    counter[i] = 0;
  }
  return false;
}

}  // namespace

int rule_size(int level) {
  check_level(level);
  return level == 1 ? 1 : (1 << (level - 1)) + 1;
}

NodeKey node_key(int level, int index) {
  const int m = rule_size(level);
  if (index < 0 || index >= m) throw std::out_of_range("node index outside rule");
  if (level == 1) return kCenterKey;
  return static_cast<NodeKey>(index) << (31 - level);
}

double node_coordinate(NodeKey key) {
  if (key > kResolution) throw std::out_of_range("node key outside [0, 2^30]");
  // x = -cos(pi k / n) written as sin(pi (k/n - 1/2)); the argument is an exact dyadic
  // rational, so nested levels and mirrored nodes agree bit for bit.
  const double q = (static_cast<double>(key) - static_cast<double>(kCenterKey)) / static_cast<double>(kResolution);
  return std::sin(std::numbers::pi * q);
}

int node_index(int level, NodeKey key) {
  check_level(level);
  if (level == 1) return key == kCenterKey ? 0 : -1;
  const NodeKey step = NodeKey{1} << (31 - level);
  return key % step == 0 ? static_cast<int>(key / step) : -1;
}

std::vector<double> OneDimRule::basis(double y) const {
  std::vector<double> out(points.size(), 0.0);
  if (points.size() == 1) {
    out[0] = 1.0;
    return out;
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (y == points[j]) {
      std::fill(out.begin(), out.end(), 0.0);
      out[j] = 1.0;
      return out;
    }
    out[j] = barycentric_weights[j] / (y - points[j]);
    denom += out[j];
  }
  for (double& v : out) v /= denom;
  return out;
}

OneDimRule cc_points(int level) {
  OneDimRule rule;
  rule.level = level;
  const int m = rule_size(level);
  for (int j = 0; j < m; ++j) {
    rule.keys.push_back(node_key(level, j));
    rule.points.push_back(node_coordinate(rule.keys.back()));
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (m > 1 && (j == 0 || j == m - 1)) w *= 0.5;
    rule.barycentric_weights.push_back(w);
  }
  return rule;
}

const OneDimRule& cc_rule(int level) {
  check_level(level);
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<OneDimRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[level];
  if (!slot) slot = std::make_unique<OneDimRule>(cc_points(level));
  return *slot;
}

const Eigen::MatrixXd& legendre_transform(int level) {
  check_level(level);
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Eigen::MatrixXd>> cache;
  const OneDimRule& rule = cc_rule(level);
  std::lock_guard lock(mutex);
  auto& slot = cache[level];
  if (!slot) {
    const auto m = static_cast<Eigen::Index>(rule.size());
    // Integrand l_j * P_p has degree <= 2m - 2: m Gauss points are exact.
    const GaussLegendre gl = gauss_legendre(static_cast<std::size_t>(m));
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const std::vector<double> l = rule.basis(gl.nodes[q]);
      for (Eigen::Index p = 0; p < m; ++p) {
        const double wp = gl.weights[q] * legendre_orthonormal(static_cast<int>(p), gl.nodes[q]);
        for (Eigen::Index j = 0; j < m; ++j) b(j, p) += l[static_cast<std::size_t>(j)] * wp;
      }
    }
    slot = std::make_unique<Eigen::MatrixXd>(std::move(b));
  }
  return *slot;
}

const Eigen::MatrixXd& lagrange_gram(int level_a, int level_b) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Eigen::MatrixXd>> cache;
  const OneDimRule& ra = cc_rule(level_a);
  const OneDimRule& rb = cc_rule(level_b);
  std::lock_guard lock(mutex);
  auto& slot = cache[{level_a, level_b}];
  if (!slot) {
    const std::size_t deg = ra.size() - 1 + rb.size() - 1;
    const GaussLegendre gl = gauss_legendre((deg + 1) / 2 + 1);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ra.size()),
                                              static_cast<Eigen::Index>(rb.size()));
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const std::vector<double> la = ra.basis(gl.nodes[q]);
      const std::vector<double> lb = rb.basis(gl.nodes[q]);
      for (std::size_t a = 0; a < la.size(); ++a)
        for (std::size_t b = 0; b < lb.size(); ++b)
          g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += gl.weights[q] * la[a] * lb[b];
    }
    slot = std::make_unique<Eigen::MatrixXd>(std::move(g));
  }
  return *slot;
}

std::vector<double> GridPoint::coordinates() const {
  std::vector<double> out;
  out.reserve(keys.size());
  for (NodeKey k : keys) out.push_back(node_coordinate(k));
  return out;
}

GridPoint point_from_coordinates(std::span<const double> y) {
  GridPoint z;
  for (double x : y) {
    if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("coordinate outside [-1,1]");
    const double q = std::asin(x) / std::numbers::pi;
    const auto key = static_cast<NodeKey>(std::llround(q * kResolution + kCenterKey));
    if (node_coordinate(key) != x) {
      throw std::invalid_argument("coordinate " + std::to_string(x) + " is not a Clenshaw-Curtis node");
    }
    z.keys.push_back(key);
  }
  return z;
}

GridPoint center_point(std::size_t dim) { return GridPoint{std::vector<NodeKey>(dim, kCenterKey)}; }

bool in_tensor_grid(const MultiIndex& index, const GridPoint& z) {
  if (index.dim() != z.dim()) throw std::invalid_argument("dimension mismatch between index and point");
  for (std::size_t i = 0; i < z.dim(); ++i) {
    if (node_index(index[i], z.keys[i]) < 0) return false;
  }
  return true;
}

std::vector<GridPoint> tensor_points(const MultiIndex& index) {
  const std::size_t d = index.dim();
  std::vector<int> extents(d);
  for (std::size_t i = 0; i < d; ++i) extents[i] = rule_size(index[i]);
  std::vector<GridPoint> out;
  std::vector<int> counter(d, 0);
  do {
    GridPoint z;
    z.keys.resize(d);
    for (std::size_t i = 0; i < d; ++i) z.keys[i] = node_key(index[i], counter[i]);
    out.push_back(std::move(z));
  } while (advance(counter, extents));
  return out;
}

std::vector<GridPoint> sparse_points(const MultiIndexSet& set) {
  std::set<GridPoint> unique;
  for (const auto& index : set) {
    for (auto& z : tensor_points(index)) unique.insert(std::move(z));
  }
  return {unique.begin(), unique.end()};
}

std::map<MultiIndex, int> combination_coefficients(const MultiIndexSet& set) {
  std::map<MultiIndex, int> out;
  for (const auto& index : set) {
    // nu + z in I (I admissible) requires nu + e_j in I for every j in z.
    std::vector<std::size_t> forward;
    for (std::size_t j = 0; j < set.dim(); ++j) {
      if (set.contains(index.incremented(j))) forward.push_back(j);
    }
    int c = 0;
    const std::size_t subsets = std::size_t{1} << forward.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      std::vector<int> levels = index.levels();
      int sign = 1;
      for (std::size_t b = 0; b < forward.size(); ++b) {
        if (mask & (std::size_t{1} << b)) {
          ++levels[forward[b]];
          sign = -sign;
        }
      }
      if (set.contains(MultiIndex(std::move(levels)))) c += sign;
    }
    out.emplace(index, c);
  }
  return out;
}

std::map<MultiIndex, int> surplus_weights(const MultiIndex& index) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < index.dim(); ++j) {
    if (index[j] > 1) active.push_back(j);
  }
  std::map<MultiIndex, int> out;
  const std::size_t subsets = std::size_t{1} << active.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<int> levels = index.levels();
    int sign = 1;
    for (std::size_t b = 0; b < active.size(); ++b) {
      if (mask & (std::size_t{1} << b)) {
        --levels[active[b]];
        sign = -sign;
      }
    }
    out.emplace(MultiIndex(std::move(levels)), sign);
  }
  return out;
}

std::map<MultiIndex, int> coefficient_difference(const MultiIndexSet& a, const MultiIndexSet& b) {
  std::map<MultiIndex, int> out;
  for (const auto& [index, c] : combination_coefficients(a)) out[index] += c;
  for (const auto& [index, c] : combination_coefficients(b)) out[index] -= c;
  std::erase_if(out, [](const auto& entry) { return entry.second == 0; });
  return out;
}

void LegendreExpansion::add(const LegendreKey& key, double weight,
                            const Eigen::Ref<const Eigen::VectorXd>& coefficient) {
  if (value_size_ == 0) {
    value_size_ = coefficient.size();
  } else if (coefficient.size() != value_size_) {
    throw std::invalid_argument("Legendre expansion terms must share one value size");
  }
  auto [it, inserted] = terms_.try_emplace(key, Eigen::VectorXd::Zero(value_size_));
  it->second.noalias() += weight * coefficient;
}

void LegendreExpansion::add(const LegendreExpansion& other, double weight) {
  for (const auto& [key, c] : other.terms_) add(key, weight, c);
}

Eigen::VectorXd LegendreExpansion::mean() const {
  for (const auto& [key, c] : terms_) {
    if (std::all_of(key.begin(), key.end(), [](int p) { return p == 0; })) return c;
  }
  return Eigen::VectorXd::Zero(value_size_);
}

Eigen::VectorXd LegendreExpansion::variance() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(value_size_);
  for (const auto& [key, c] : terms_) {
    if (std::any_of(key.begin(), key.end(), [](int p) { return p != 0; })) out += c.cwiseAbs2();
  }
  return out;
}

double LegendreExpansion::squared_norm(const SparseMatrix* mass) const {
  double total = 0.0;
  for (const auto& [key, c] : terms_) {
    total += mass ? c.dot(*mass * c) : c.squaredNorm();
  }
  return total;
}

LegendreExpansion legendre_expansion(const std::map<MultiIndex, int>& weights, const PointValues& values) {
  LegendreExpansion out;
  for (const auto& [index, weight] : weights) {
    if (weight == 0) continue;
    const std::size_t d = index.dim();
    const std::vector<GridPoint> grid = tensor_points(index);
    const auto first = values.find(grid.front());
    if (first == values.end()) throw std::invalid_argument("missing collocation value for tensor grid");
    const Eigen::Index n = first->second.size();
    const auto rows = static_cast<Eigen::Index>(grid.size());

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor data(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto it = values.find(grid[static_cast<std::size_t>(r)]);
      if (it == values.end()) throw std::invalid_argument("missing collocation value for tensor grid");
      if (it->second.size() != n) throw std::invalid_argument("collocation values differ in size");
      data.row(r) = it->second.transpose();
    }

    // Mode products: nodal values -> Legendre coefficients, one dimension at a time.
    std::vector<int> extents(d);
    for (std::size_t i = 0; i < d; ++i) extents[i] = rule_size(index[i]);
    for (std::size_t k = 0; k < d; ++k) {
      const Eigen::Index m = extents[k];
      if (m == 1) continue;
      Eigen::Index outer = 1;
      Eigen::Index inner = 1;
      for (std::size_t i = 0; i < k; ++i) outer *= extents[i];
      for (std::size_t i = k + 1; i < d; ++i) inner *= extents[i];
      const Eigen::MatrixXd& b = legendre_transform(index[k]);
      for (Eigen::Index o = 0; o < outer; ++o) {
        Eigen::Map<RowMajor> slab(data.data() + o * m * inner * n, m, inner * n);
        RowMajor transformed = b.transpose() * slab;
        slab = transformed;
      }
    }

    std::vector<int> counter(d, 0);
    Eigen::Index r = 0;
    do {
      out.add(counter, static_cast<double>(weight), data.row(r).transpose());
      ++r;
    } while (advance(counter, extents));
  }
  return out;
}

double combination_norm(const std::map<MultiIndex, int>& weights, const PointValues& values,
                        const SparseMatrix* mass) {
  return std::sqrt(std::max(0.0, legendre_expansion(weights, values).squared_norm(mass)));
}

SparseInterpolant::SparseInterpolant(MultiIndexSet set, const PointValues& values, double time)
    : set_(std::move(set)), time_(time) {
  if (set_.empty()) throw std::invalid_argument("sparse interpolant needs a nonempty index set");
  if (!set_.is_admissible()) throw std::invalid_argument("sparse interpolant needs an admissible index set");
  coefficients_ = combination_coefficients(set_);
  points_ = sparse_points(set_);
  for (const auto& z : points_) {
    const auto it = values.find(z);
    if (it == values.end()) throw std::invalid_argument("missing collocation value for sparse grid point");
    values_.emplace(z, it->second);
  }
}

const Eigen::VectorXd& SparseInterpolant::value_at(const GridPoint& z) const {
  const auto it = values_.find(z);
  if (it == values_.end()) throw std::out_of_range("point is not a collocation point of this interpolant");
  return it->second;
}

Eigen::Index SparseInterpolant::value_size() const { return values_.begin()->second.size(); }

Eigen::VectorXd SparseInterpolant::evaluate(std::span<const double> y) const {
  const std::size_t d = dim();
  if (y.size() != d) throw std::invalid_argument("evaluation point has wrong dimension");
  for (double v : y) {
    if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument("evaluation point outside [-1,1]^d");
  }
  const std::vector<int> top = set_.max_levels();
  // basis[i][level - 1] = Lagrange basis values of that level at y_i
  std::vector<std::vector<std::vector<double>>> basis(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (int level = 1; level <= top[i]; ++level) basis[i].push_back(cc_rule(level).basis(y[i]));
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(value_size());
  for (const auto& [index, c] : coefficients_) {
    if (c == 0) continue;
    std::vector<int> extents(d);
    for (std::size_t i = 0; i < d; ++i) extents[i] = rule_size(index[i]);
    std::vector<int> counter(d, 0);
    GridPoint z;
    z.keys.resize(d);
    do {
      double w = c;
      for (std::size_t i = 0; i < d && w != 0.0; ++i) {
        w *= basis[i][static_cast<std::size_t>(index[i] - 1)][static_cast<std::size_t>(counter[i])];
      }
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) z.keys[i] = node_key(index[i], counter[i]);
      out.noalias() += w * values_.at(z);
    } while (advance(counter, extents));
  }
  return out;
}

LegendreExpansion SparseInterpolant::expansion() const { return legendre_expansion(coefficients_, values_); }

double weighted_lagrange_norm(const std::map<MultiIndex, int>& weights, const GridPoint& z) {
  struct Term {
    const MultiIndex* index;
    double weight;
    std::vector<int> position;
  };
  std::vector<Term> terms;
  for (const auto& [index, w] : weights) {
    if (w == 0 || !in_tensor_grid(index, z)) continue;
    Term t{&index, static_cast<double>(w), {}};
    for (std::size_t i = 0; i < z.dim(); ++i) t.position.push_back(node_index(index[i], z.keys[i]));
    terms.push_back(std::move(t));
  }
  double total = 0.0;
  for (const Term& a : terms) {
    for (const Term& b : terms) {
      double g = a.weight * b.weight;
      for (std::size_t i = 0; i < z.dim() && g != 0.0; ++i) {
        g *= lagrange_gram((*a.index)[i], (*b.index)[i])(a.position[i], b.position[i]);
      }
      total += g;
    }
  }
  return std::sqrt(std::max(0.0, total));
}

double lagrange_norm(const MultiIndexSet& set, const GridPoint& z, Density) {
  const auto coefficients = combination_coefficients(set);
  bool present = false;
  for (const auto& [index, c] : coefficients) {
    if (in_tensor_grid(index, z)) {
      present = true;
      break;
    }
  }
  if (!present) throw std::invalid_argument("point is not in the sparse grid of the index set");
  return weighted_lagrange_norm(coefficients, z);
}

double lagrange_difference_norm(const MultiIndexSet& a, const MultiIndexSet& b, const GridPoint& z, Density) {
  return weighted_lagrange_norm(coefficient_difference(a, b), z);
}

double difference_norm(const SparseInterpolant& a, const SparseInterpolant& b, const SparseMatrix* mass) {
  if (a.dim() != b.dim()) throw std::invalid_argument("interpolants differ in parameter dimension");
  if (a.value_size() != b.value_size()) throw std::invalid_argument("interpolants differ in spatial dimension");
  if (a.time() != b.time()) throw std::invalid_argument("interpolants represent different times");
  if (mass && mass->rows() != a.value_size()) throw std::invalid_argument("mass matrix does not match values");
  LegendreExpansion diff = a.expansion();
  diff.add(b.expansion(), -1.0);
  return std::sqrt(std::max(0.0, diff.squared_norm(mass)));
}

}  // namespace adaptsc
