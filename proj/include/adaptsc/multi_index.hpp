#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace adaptsc {

/// Level multi-index over N_+^d. Every entry is a level number >= 1.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> levels);
  MultiIndex(std::initializer_list<int> levels);

  /// The all-ones index in `dim` dimensions.
  static MultiIndex ones(std::size_t dim);

  std::size_t dim() const { return levels_.size(); }
  int operator[](std::size_t i) const { return levels_[i]; }
  const std::vector<int>& levels() const { return levels_; }

  /// Sum of (level - 1) over all dimensions.
  int excess() const;

  MultiIndex incremented(std::size_t j) const;
  MultiIndex decremented(std::size_t j) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  std::string to_string() const;

 private:
  std::vector<int> levels_;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& index);

/// Set of multi-indices of a fixed dimension, iterated in lexicographic order.
///
/// Values are immutable once built; `with` and `united` return new sets.
class MultiIndexSet {
 public:
  using const_iterator = std::set<MultiIndex>::const_iterator;

  explicit MultiIndexSet(std::size_t dim);
  MultiIndexSet(std::size_t dim, std::initializer_list<MultiIndex> members);
  MultiIndexSet(std::size_t dim, const std::vector<MultiIndex>& members);

  /// {(1,...,1)}.
  static MultiIndexSet root(std::size_t dim);
  /// {nu : sum_i (nu_i - 1) <= w}.
  static MultiIndexSet total_degree(std::size_t dim, int w);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const MultiIndex& index) const { return members_.count(index) != 0; }

  const_iterator begin() const { return members_.begin(); }
  const_iterator end() const { return members_.end(); }
  std::vector<MultiIndex> members() const { return {members_.begin(), members_.end()}; }

  MultiIndexSet with(const MultiIndex& index) const;
  MultiIndexSet united(const MultiIndexSet& other) const;

  /// Downward closedness: nu - e_j is a member whenever nu_j > 1.
  bool is_admissible() const;
  /// Union of forward neighbours nu + e_j, minus the set itself.
  MultiIndexSet margin() const;
  /// Margin members whose single addition keeps the set admissible.
  MultiIndexSet reduced_margin() const;
  /// I+ = I united with its reduced margin.
  MultiIndexSet enhance() const;

  /// Largest level used in each dimension (zeros for an empty set).
  std::vector<int> max_levels() const;

  bool operator==(const MultiIndexSet& other) const = default;

 private:
  void check_dim(const MultiIndex& index) const;

  std::size_t dim_;
  std::set<MultiIndex> members_;
};

/// True when adding `candidate` to `set` keeps it downward closed.
bool can_extend(const MultiIndexSet& set, const MultiIndex& candidate);

/// One member per line, levels separated by spaces.
std::string serialize(const MultiIndexSet& set);
MultiIndexSet parse_multi_index_set(std::size_t dim, const std::string& text);

}  // namespace adaptsc
