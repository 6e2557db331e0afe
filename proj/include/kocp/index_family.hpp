#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kocp/errors.hpp"
#include "kocp/tolerances.hpp"

namespace kocp {

/// Strictly increasing tuple of 1-based indices, the combinatorial address
/// of a principal submatrix.
class IndexTuple {
 public:
  explicit IndexTuple(std::vector<int> idx) : idx_(std::move(idx)) {
    if (idx_.empty()) throw InputError("IndexTuple: empty tuple");
    for (size_t p = 0; p < idx_.size(); ++p) {
      if (idx_[p] < 1) throw InputError("IndexTuple: indices are 1-based positive");
      if (p > 0 && idx_[p] <= idx_[p - 1])
        throw InputError("IndexTuple: indices must be strictly increasing");
    }
  }

  IndexTuple(std::initializer_list<int> idx) : IndexTuple(std::vector<int>(idx)) {}

  int size() const { return static_cast<int>(idx_.size()); }
  int operator[](int p) const { return idx_[p]; }
  /// 0-based ambient index of local position p.
  int zero_based(int p) const { return idx_[p] - 1; }
  int max_index() const { return idx_.back(); }
  const std::vector<int>& indices() const { return idx_; }

  bool contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

  auto operator<=>(const IndexTuple& o) const { return idx_ <=> o.idx_; }
  bool operator==(const IndexTuple& o) const { return idx_ == o.idx_; }

  std::string to_string() const {
    std::string s = "(";
    for (size_t p = 0; p < idx_.size(); ++p) {
      if (p) s += ",";
      s += std::to_string(idx_[p]);
    }
    return s + ")";
  }

 private:
  std::vector<int> idx_;
};

enum class IndexMap { Full, Soc };

/// A set J of k-tuples over ambient dimension d, kept sorted and duplicate-free.
struct IndexFamily {
  int d = 0;
  int k = 0;
  std::vector<IndexTuple> tuples;

  IndexFamily() = default;
  IndexFamily(int d_, int k_, std::vector<IndexTuple> t) : d(d_), k(k_), tuples(std::move(t)) {
    validate();
  }

  int size() const { return static_cast<int>(tuples.size()); }

  bool contains(const IndexTuple& t) const {
    return std::binary_search(tuples.begin(), tuples.end(), t);
  }

  void validate() {
    if (k < 1 || k > d) throw InputError("IndexFamily: need 1 <= k <= d");
    std::sort(tuples.begin(), tuples.end());
    for (size_t i = 0; i < tuples.size(); ++i) {
      if (tuples[i].size() != k) throw InputError("IndexFamily: tuple of wrong length");
      if (tuples[i].max_index() > d) throw InputError("IndexFamily: index exceeds ambient dim");
      if (i > 0 && tuples[i] == tuples[i - 1]) throw InputError("IndexFamily: duplicate tuple");
    }
  }

  /// True when every tuple starts with index 1 (the I_SOC shape).
  bool soc_shaped() const {
    for (const auto& t : tuples)
      if (t[0] != 1) return false;
    return true;
  }
};

namespace detail {

inline void emit_tuples(int next, int remaining, int d, std::vector<int>& cur,
                        std::vector<IndexTuple>& out) {
  if (remaining == 0) {
    out.emplace_back(cur);
    return;
  }
  for (int i = next; i + remaining - 1 <= d; ++i) {
    cur.push_back(i);
    emit_tuples(i + 1, remaining - 1, d, cur, out);
    cur.pop_back();
  }
}

inline long long binomial(long long n, long long r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  long long acc = 1;
  for (long long i = 1; i <= r; ++i) acc = acc * (n - r + i) / i;
  return acc;
}

}  // namespace detail

/// Enumerates all index tuples of the chosen map.
/// Full: all C(d,k) increasing k-tuples in [d].
/// Soc: tuples (1, i_1, ..., i_{k-1}) with 2 <= i_1 < ... <= d; {(1)} for k=1.
inline IndexFamily enumerate_tuples(int d, int k, IndexMap map, bool force_size = false) {
  if (k < 1 || k > d) throw InputError("enumerate_tuples: need 1 <= k <= d");
  const long long count = map == IndexMap::Full ? detail::binomial(d, k)
                                                : detail::binomial(d - 1, k - 1);
  if (count > tol::tuple_cap && !force_size)
    throw InputError("enumerate_tuples: |J| = " + std::to_string(count) +
                     " exceeds the cap; pass force_size to override");
  std::vector<IndexTuple> tuples;
  tuples.reserve(static_cast<size_t>(count));
  std::vector<int> cur;
  if (map == IndexMap::Full) {
    detail::emit_tuples(1, k, d, cur, tuples);
  } else {
    cur.push_back(1);
    detail::emit_tuples(2, k - 1, d, cur, tuples);
  }
  return IndexFamily(d, k, std::move(tuples));
}

/// Checks the nested-cones chain condition: every tuple of `lo` extends to a
/// tuple of `hi` (with |hi tuple| = |lo tuple| + 1) containing all its entries.
inline bool nesting_chain_condition(const IndexFamily& lo, const IndexFamily& hi) {
  if (hi.k != lo.k + 1 || hi.d != lo.d) return false;
  for (const auto& s : lo.tuples) {
    bool extended = false;
    for (const auto& t : hi.tuples) {
      bool covers = true;
      for (int p = 0; p < s.size() && covers; ++p) covers = t.contains(s[p]);
      if (covers) {
        extended = true;
        break;
      }
    }
    if (!extended) return false;
  }
  return true;
}

}  // namespace kocp
