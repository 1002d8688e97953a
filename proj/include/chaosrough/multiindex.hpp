#pragma once
// Sorted multi-indices over a finite basis, plus the small combinatorial
// helpers (factorials, falling factorials, sub-multiset enumeration) that the
// symmetric tensor algebra is built on.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace chaosrough {

// A multi-index is an ascending list of 0-based basis indices; its length is
// the tensor order. The empty index labels the scalar slot.
using MultiIndex = std::vector<int>;

inline double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// n(n-1)...(n-k+1); zero when k > n.
inline double falling_factorial(int n, int k) {
  if (k < 0) throw std::invalid_argument("falling_factorial: negative k");
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (n - i);
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return falling_factorial(n, k) / factorial(k);
}

inline bool is_sorted_index(const MultiIndex& a) {
  return std::is_sorted(a.begin(), a.end());
}

inline MultiIndex sorted_index(MultiIndex a) {
  std::sort(a.begin(), a.end());
  return a;
}

inline MultiIndex merge_sorted(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// (value, count) pairs in ascending value order.
inline std::vector<std::pair<int, int>> multiplicities(const MultiIndex& a) {
  std::vector<std::pair<int, int>> out;
  for (int v : a) {
    if (!out.empty() && out.back().first == v)
      ++out.back().second;
    else
      out.emplace_back(v, 1);
  }
  return out;
}

// alpha! = product over distinct values of (multiplicity)!.
inline double multiplicity_factorial(const MultiIndex& a) {
  double r = 1.0;
  for (const auto& [v, m] : multiplicities(a)) r *= factorial(m);
  return r;
}

// Count of value v in sorted multi-index a.
inline int multiplicity_of(const MultiIndex& a, int v) {
  auto [lo, hi] = std::equal_range(a.begin(), a.end(), v);
  return static_cast<int>(hi - lo);
}

// All distinct sub-multisets of size r, each sorted. Enumerates per-value
// counts, so duplicates never appear.
inline std::vector<MultiIndex> sub_multisets(const MultiIndex& a, int r) {
  if (r < 0 || r > static_cast<int>(a.size()))
    throw std::invalid_argument("sub_multisets: size out of range");
  const auto mults = multiplicities(a);
  std::vector<MultiIndex> out;
  MultiIndex current;
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    if (pos == mults.size()) return;
    const auto [v, m] = mults[pos];
    const int take_max = std::min(m, remaining);
    for (int take = 0; take <= take_max; ++take) {
      current.insert(current.end(), take, v);
      self(self, pos + 1, remaining - take);
      current.erase(current.end() - take, current.end());
    }
  };
  rec(rec, 0, r);
  return out;
}

// a minus b as multisets; b must be contained in a.
inline MultiIndex multiset_minus(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out;
  out.reserve(a.size() - b.size());
  std::size_t j = 0;
  for (int v : a) {
    if (j < b.size() && b[j] == v)
      ++j;
    else
      out.push_back(v);
  }
  if (j != b.size())
    throw std::invalid_argument("multiset_minus: second argument not contained in first");
  return out;
}

// Every sorted multi-index of the given order over indices [0, dim).
inline std::vector<MultiIndex> all_multi_indices(int order, int dim) {
  if (order < 0 || dim <= 0)
    throw std::invalid_argument("all_multi_indices: bad order or dim");
  std::vector<MultiIndex> out;
  MultiIndex current;
  auto rec = [&](auto&& self, int next_min, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (int v = next_min; v < dim; ++v) {
      current.push_back(v);
      self(self, v, remaining - 1);
      current.pop_back();
    }
  };
  rec(rec, 0, order);
  return out;
}

}  // namespace chaosrough
