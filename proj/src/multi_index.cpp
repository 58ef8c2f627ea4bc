#include "adaptsc/multi_index.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace adaptsc {

MultiIndex::MultiIndex(std::vector<int> levels) : levels_(std::move(levels)) {
  for (int level : levels_) {
    if (level < 1) throw std::invalid_argument("multi-index levels must be >= 1");
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> levels) : MultiIndex(std::vector<int>(levels)) {}

MultiIndex MultiIndex::ones(std::size_t dim) { return MultiIndex(std::vector<int>(dim, 1)); }

int MultiIndex::excess() const {
  return std::accumulate(levels_.begin(), levels_.end(), 0) - static_cast<int>(levels_.size());
}

MultiIndex MultiIndex::incremented(std::size_t j) const {
  MultiIndex out = *this;
  ++out.levels_.at(j);
  return out;
}

MultiIndex MultiIndex::decremented(std::size_t j) const {
  if (levels_.at(j) <= 1) throw std::invalid_argument("cannot decrement a level-1 entry");
  MultiIndex out = *this;
  --out.levels_[j];
  return out;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& index) {
  os << '(';
  for (std::size_t i = 0; i < index.dim(); ++i) {
    if (i) os << ',';
    os << index[i];
  }
  return os << ')';
}

MultiIndexSet::MultiIndexSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("multi-index set dimension must be positive");
}

MultiIndexSet::MultiIndexSet(std::size_t dim, std::initializer_list<MultiIndex> members)
    : MultiIndexSet(dim, std::vector<MultiIndex>(members)) {}

MultiIndexSet::MultiIndexSet(std::size_t dim, const std::vector<MultiIndex>& members) : MultiIndexSet(dim) {
  for (const auto& m : members) {
    check_dim(m);
    members_.insert(m);
  }
}

MultiIndexSet MultiIndexSet::root(std::size_t dim) { return MultiIndexSet(dim, {MultiIndex::ones(dim)}); }

MultiIndexSet MultiIndexSet::total_degree(std::size_t dim, int w) {
  if (w < 0) throw std::invalid_argument("total degree must be nonnegative");
  MultiIndexSet out = root(dim);
  // Grow layer by layer; every member of layer k+1 is a forward neighbour of layer k.
  std::vector<MultiIndex> layer{MultiIndex::ones(dim)};
  for (int k = 0; k < w; ++k) {
    std::set<MultiIndex> next;
    for (const auto& m : layer)
      for (std::size_t j = 0; j < dim; ++j) next.insert(m.incremented(j));
    out.members_.insert(next.begin(), next.end());
    layer.assign(next.begin(), next.end());
  }
  return out;
}

void MultiIndexSet::check_dim(const MultiIndex& index) const {
  if (index.dim() != dim_) {
    throw std::invalid_argument("multi-index " + index.to_string() + " does not match set dimension " +
                                std::to_string(dim_));
  }
}

MultiIndexSet MultiIndexSet::with(const MultiIndex& index) const {
  check_dim(index);
  MultiIndexSet out = *this;
  out.members_.insert(index);
  return out;
}

MultiIndexSet MultiIndexSet::united(const MultiIndexSet& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("cannot unite multi-index sets of different dimension");
  MultiIndexSet out = *this;
  out.members_.insert(other.members_.begin(), other.members_.end());
  return out;
}

bool MultiIndexSet::is_admissible() const {
  return std::all_of(members_.begin(), members_.end(), [this](const MultiIndex& m) {
    for (std::size_t j = 0; j < dim_; ++j) {
      if (m[j] > 1 && !contains(m.decremented(j))) return false;
    }
    return true;
  });
}

MultiIndexSet MultiIndexSet::margin() const {
  MultiIndexSet out(dim_);
  for (const auto& m : members_) {
    for (std::size_t j = 0; j < dim_; ++j) {
      auto next = m.incremented(j);
      if (!contains(next)) out.members_.insert(std::move(next));
    }
  }
  return out;
}

bool can_extend(const MultiIndexSet& set, const MultiIndex& candidate) {
  for (std::size_t j = 0; j < candidate.dim(); ++j) {
    if (candidate[j] > 1 && !set.contains(candidate.decremented(j))) return false;
  }
  return true;
}

MultiIndexSet MultiIndexSet::reduced_margin() const {
  MultiIndexSet out(dim_);
  for (const auto& m : margin()) {
    if (can_extend(*this, m)) out.members_.insert(m);
  }
  return out;
}

MultiIndexSet MultiIndexSet::enhance() const { return united(reduced_margin()); }

std::vector<int> MultiIndexSet::max_levels() const {
  std::vector<int> out(dim_, 0);
  for (const auto& m : members_)
    for (std::size_t j = 0; j < dim_; ++j) out[j] = std::max(out[j], m[j]);
  return out;
}

std::string serialize(const MultiIndexSet& set) {
  std::ostringstream os;
  for (const auto& m : set) {
    for (std::size_t j = 0; j < m.dim(); ++j) os << (j ? " " : "") << m[j];
    os << '\n';
  }
  return os.str();
}

MultiIndexSet parse_multi_index_set(std::size_t dim, const std::string& text) {
  MultiIndexSet out(dim);
  std::istringstream is(text);
  std::string line;
  std::vector<MultiIndex> members;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<int> levels;
    int v = 0;
    while (ls >> v) levels.push_back(v);
    if (!ls.eof()) throw std::invalid_argument("malformed multi-index line: " + line);
    members.emplace_back(std::move(levels));
  }
  return MultiIndexSet(dim, members);
}

}  // namespace adaptsc
