#pragma once
// Discrete p-variation machinery over grids.
//
// All suprema here range over partitions whose points lie on the grid, which
// is the exact object the experiments measure. 1D: dynamic programming in
// O(N^2) given an increment-norm callback, plus a brute-force enumeration for
// cross-checking on small inputs. 2D: supremum of sum_cells |mu(cell)|^rho
// over grid partitions of both axes, exhaustive for small grids and a
// certified lower bound via coarsening otherwise.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "chaosrough/linalg.hpp"

namespace chaosrough {

// sup over grid partitions i0 = k_0 < ... < k_m = i1 of sum |inc(k_j, k_{j+1})|^rho,
// returned in power form (no 1/rho root). Grid partitions are exactly the
// chains from i0 to i1 and the cost is additive over links, so the DP
// V[j] = max_i V[i] + inc(i, j)^rho attains the supremum exactly.
inline double rho_var_pow_dp(int i0, int i1,
                             const std::function<double(int, int)>& inc_norm,
                             double rho) {
  if (rho < 1.0) throw std::invalid_argument("rho_var_pow_dp: rho must be >= 1");
  if (i1 < i0) throw std::invalid_argument("rho_var_pow_dp: empty range");
  if (i1 == i0) return 0.0;
  const int n = i1 - i0;
  Vec v(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 1; j <= n; ++j) {
    double best = 0.0;
    for (int i = 0; i < j; ++i) {
      const double w = std::pow(inc_norm(i0 + i, i0 + j), rho);
      best = std::max(best, v[i] + w);
    }
    v[j] = best;
  }
  return v[n];
}

// Same supremum by explicit enumeration of every subset of interior points.
// Guarded to small ranges; used as an oracle against the DP.
inline double rho_var_pow_exhaustive(int i0, int i1,
                                     const std::function<double(int, int)>& inc_norm,
                                     double rho) {
  const int interior = i1 - i0 - 1;
  if (interior < 0) return 0.0;
  if (interior > 20) throw std::invalid_argument("rho_var_pow_exhaustive: range too large");
  double best = 0.0;
  const std::uint32_t top = 1u << interior;
  std::vector<int> pts;
  for (std::uint32_t mask = 0; mask < top; ++mask) {
    pts.clear();
    pts.push_back(i0);
    for (int b = 0; b < interior; ++b)
      if (mask & (1u << b)) pts.push_back(i0 + 1 + b);
    pts.push_back(i1);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      s += std::pow(inc_norm(pts[k], pts[k + 1]), rho);
    best = std::max(best, s);
  }
  return best;
}

struct Variation2DResult {
  double value = 0.0;  // root form: sup^(1/rho)
  bool exact = false;  // true when the supremum was enumerated exhaustively
};

namespace detail {

// Rectangle sums of the cell matrix via 2D prefix sums.
struct CellPrefix {
  int n1, n2;
  Mat p;  // p(i,j) = sum of cells [0,i) x [0,j)
  explicit CellPrefix(const Mat& cells) : n1(cells.rows), n2(cells.cols), p(n1 + 1, n2 + 1) {
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        p.at(i + 1, j + 1) = cells.at(i, j) + p.at(i, j + 1) + p.at(i + 1, j) - p.at(i, j);
  }
  double rect(int i0, int i1, int j0, int j1) const {
    return p.at(i1, j1) - p.at(i0, j1) - p.at(i1, j0) + p.at(i0, j0);
  }
};

inline double variation_2d_over_cuts(const CellPrefix& pre,
                                     const std::vector<int>& cuts1,
                                     const std::vector<int>& cuts2,
                                     double rho) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts1.size(); ++i)
    for (std::size_t j = 0; j + 1 < cuts2.size(); ++j)
      s += std::pow(std::abs(pre.rect(cuts1[i], cuts1[i + 1], cuts2[j], cuts2[j + 1])), rho);
  return s;
}

}  // namespace detail

// cells(i,j) holds the signed mass of the elementary rectangle (i,j); the
// supremum ranges over all pairs of axis partitions drawn from the cell
// boundaries. Exhaustive when both axes have at most max_exhaustive cells
// (2^(n-1) subsets per axis); otherwise the axes are coarsened to at most
// max_exhaustive blocks and the coarse supremum is reported as a lower bound.
inline Variation2DResult variation_2d(const Mat& cells, double rho, int max_exhaustive = 10) {
  if (rho < 1.0) throw std::invalid_argument("variation_2d: rho must be >= 1");
  const int n1 = cells.rows, n2 = cells.cols;
  if (n1 == 0 || n2 == 0) return {0.0, true};
  const detail::CellPrefix pre(cells);

  const auto axis_cuts = [&](int n) {
    std::vector<std::vector<int>> all;
    const int interior = n - 1;
    const std::uint32_t top = 1u << interior;
    for (std::uint32_t mask = 0; mask < top; ++mask) {
      std::vector<int> cuts{0};
      for (int b = 0; b < interior; ++b)
        if (mask & (1u << b)) cuts.push_back(b + 1);
      cuts.push_back(n);
      all.push_back(std::move(cuts));
    }
    return all;
  };

  const bool exact = n1 <= max_exhaustive && n2 <= max_exhaustive;
  std::vector<std::vector<int>> cuts1, cuts2;
  if (exact) {
    cuts1 = axis_cuts(n1);
    cuts2 = axis_cuts(n2);
  } else {
    // Coarsen each axis to at most max_exhaustive contiguous blocks; any
    // partition of the coarse axis is a legal partition of the fine one.
    const auto coarse_axis = [&](int n) {
      std::vector<int> marks{0};
      const int blocks = std::min(n, max_exhaustive);
      for (int b = 1; b <= blocks; ++b) marks.push_back(static_cast<int>(std::llround(static_cast<double>(b) * n / blocks)));
      std::vector<std::vector<int>> all;
      const int interior = static_cast<int>(marks.size()) - 2;
      const std::uint32_t top = 1u << interior;
      for (std::uint32_t mask = 0; mask < top; ++mask) {
        std::vector<int> cuts{0};
        for (int b = 0; b < interior; ++b)
          if (mask & (1u << b)) cuts.push_back(marks[b + 1]);
        cuts.push_back(n);
        all.push_back(std::move(cuts));
      }
      return all;
    };
    cuts1 = coarse_axis(n1);
    cuts2 = coarse_axis(n2);
  }

  double best = 0.0;
  for (const auto& c1 : cuts1)
    for (const auto& c2 : cuts2)
      best = std::max(best, detail::variation_2d_over_cuts(pre, c1, c2, rho));
  return {std::pow(best, 1.0 / rho), exact};
}

}  // namespace chaosrough
