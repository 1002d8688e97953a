#pragma once
// Concrete kernel families t -> f_t in H^{(x)n} over a fixed time grid, their
// covariance surfaces, and regularity diagnostics.
//
// A KernelPath holds one kernel per grid node; the chaos process it induces
// is X_{t_i} = I_n(f_{t_i}). Factories cover the standard examples: Brownian
// motion (indicator kernels), fractional Brownian motion (Cholesky of the
// node covariance, exact on the grid), products of independent Gaussian
// factors embedded in disjoint coordinate blocks, and a deterministic-slope
// square kernel used by the rate-function experiments.
//
// Diagnostics: two-parameter rho-variation of the covariance, two-parameter
// controls (interval-overlap and the factor-variation control for product
// kernels), and per-clause regularity reports.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaosrough/chaos.hpp"
#include "chaosrough/linalg.hpp"
#include "chaosrough/symtensor.hpp"
#include "chaosrough/variation.hpp"

namespace chaosrough {

inline void validate_grid(const std::vector<double>& grid, bool require_zero_start = true) {
  if (grid.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
  if (require_zero_start && grid.front() != 0.0) throw std::invalid_argument("grid must start at 0");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1])) throw std::invalid_argument("grid must be strictly increasing");
}

inline std::vector<double> uniform_grid(int cells) {
  if (cells < 1) throw std::invalid_argument("uniform_grid: cells must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) g[i] = static_cast<double>(i) / cells;
  return g;
}

inline std::vector<double> dyadic_grid(int level) {
  if (level < 0 || level > 24) throw std::invalid_argument("dyadic_grid: level out of range");
  return uniform_grid(1 << level);
}

// Re-key a tensor on dim coordinates into an ambient space, shifting every
// index by offset. Used to place independent factors in disjoint blocks.
inline SymTensor embed(const SymTensor& s, int ambient_dim, int offset) {
  if (offset < 0 || offset + s.dim() > ambient_dim)
    throw std::invalid_argument("embed: block does not fit in ambient space");
  SymTensor out(s.order(), ambient_dim);
  for (const auto& [idx, c] : s.coeffs()) {
    MultiIndex shifted = idx;
    for (int& v : shifted) v += offset;
    out.add(shifted, c);
  }
  return out;
}

struct KernelPath {
  int order = 0;
  std::vector<double> grid;
  std::vector<SymTensor> kernels;  // one per node; empty when nodes_materialized is false
  std::string label;
  std::vector<KernelPath> factors;  // for product kernels, already embedded
  bool nodes_materialized = true;

  int dim() const {
    if (!kernels.empty()) return kernels.front().dim();
    return factors.empty() ? 0 : factors.front().dim();
  }
  int nodes() const { return static_cast<int>(grid.size()); }
  int cells() const { return nodes() - 1; }

  const SymTensor& at(int i) const {
    if (!nodes_materialized)
      throw std::logic_error("KernelPath::at: node kernels not materialized, work with factors");
    if (i < 0 || i >= nodes()) throw std::out_of_range("KernelPath::at: node out of range");
    return kernels[static_cast<std::size_t>(i)];
  }

  SymTensor increment(int i, int j) const {
    SymTensor d = at(j) - at(i);
    d.prune();
    return d;
  }

  int index_of(double t) const {
    for (int i = 0; i < nodes(); ++i)
      if (std::abs(grid[i] - t) <= 1e-12) return i;
    throw std::invalid_argument("KernelPath::index_of: time not on grid");
  }

  void validate() const {
    validate_grid(grid);
    if (!nodes_materialized) {
      if (factors.empty())
        throw std::invalid_argument("KernelPath: unmaterialized path needs a factor decomposition");
      int total_order = 0;
      for (const auto& f : factors) {
        f.validate();
        if (f.grid != grid) throw std::invalid_argument("KernelPath: factor grid mismatch");
        if (f.dim() != dim()) throw std::invalid_argument("KernelPath: factor dimension mismatch");
        total_order += f.order;
      }
      if (total_order != order) throw std::invalid_argument("KernelPath: factor order mismatch");
      return;
    }
    if (kernels.size() != grid.size()) throw std::invalid_argument("KernelPath: one kernel per node required");
    for (const auto& k : kernels) {
      if (k.order() != order) throw std::invalid_argument("KernelPath: kernel order mismatch");
      if (k.dim() != dim()) throw std::invalid_argument("KernelPath: kernel dimension mismatch");
    }
  }
};

// Brownian motion on the grid: cell i carries basis vector e_i scaled so that
// <f_s, f_t> = min(s, t) exactly at the nodes.
inline KernelPath brownian_kernel(const std::vector<double>& grid) {
  validate_grid(grid);
  const int cells = static_cast<int>(grid.size()) - 1;
  KernelPath p;
  p.order = 1;
  p.grid = grid;
  p.label = "brownian";
  SymTensor f(1, cells);
  p.kernels.push_back(f);
  for (int i = 0; i < cells; ++i) {
    f.add({i}, std::sqrt(grid[i + 1] - grid[i]));
    p.kernels.push_back(f);
  }
  return p;
}

// Fractional Brownian motion with Hurst index H: the node covariance
// C(i, j) = (t_i^{2H} + t_j^{2H} - |t_i - t_j|^{2H}) / 2 is factored as
// L L^T and node i receives row i of L, so the grid covariance is exact.
inline KernelPath fbm_kernel(double hurst, const std::vector<double>& grid) {
  validate_grid(grid);
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fbm_kernel: H must lie in (0,1)");
  const int cells = static_cast<int>(grid.size()) - 1;
  Mat c(cells, cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) {
      const double s = grid[i + 1], t = grid[j + 1];
      c.at(i, j) = 0.5 * (std::pow(s, 2 * hurst) + std::pow(t, 2 * hurst) - std::pow(std::abs(t - s), 2 * hurst));
    }
  const Mat l = cholesky(c);
  KernelPath p;
  p.order = 1;
  p.grid = grid;
  p.label = "fbm(" + std::to_string(hurst) + ")";
  SymTensor zero(1, cells);
  p.kernels.push_back(zero);
  for (int i = 0; i < cells; ++i) {
    SymTensor f(1, cells);
    for (int j = 0; j <= i; ++j)
      if (l.at(i, j) != 0.0) f.add({j}, l.at(i, j));
    p.kernels.push_back(f);
  }
  return p;
}

// Kernel that jumps at jump_time; used as a negative example in regularity
// checks (its covariance has a point mass, so no Holder control exists).
inline KernelPath step_kernel(const std::vector<double>& grid, double jump_time) {
  validate_grid(grid);
  KernelPath p;
  p.order = 1;
  p.grid = grid;
  p.label = "step";
  for (double t : grid) {
    SymTensor f(1, 1);
    if (t >= jump_time) f.add({0}, 1.0);
    p.kernels.push_back(f);
  }
  return p;
}

// Deterministic-slope square kernel f_t = t * (e_0 (x) e_0); the induced
// chaos is t * (xi_0^2 - 1). Used by rate-function experiments.
inline KernelPath diagonal_square_kernel(const std::vector<double>& grid, int dim = 1) {
  validate_grid(grid);
  if (dim < 1) throw std::invalid_argument("diagonal_square_kernel: dim must be >= 1");
  KernelPath p;
  p.order = 2;
  p.grid = grid;
  p.label = "diagonal-square";
  for (double t : grid) {
    SymTensor f(2, dim);
    if (t != 0.0) f.add({0, 0}, t);
    p.kernels.push_back(f);
  }
  return p;
}

// Product of independent factors: the factors are embedded in disjoint
// coordinate blocks of one ambient space and the node kernel is the
// symmetrized outer product of the embedded factor kernels. Because the
// blocks are disjoint, I_{n1+...+nm}(f^1 (x-hat) ... (x-hat) f^m) equals the
// pointwise product of the factor chaoses.
inline KernelPath product_kernel(const std::vector<KernelPath>& factors,
                                 bool materialize_nodes = true) {
  if (factors.size() < 2) throw std::invalid_argument("product_kernel: need at least two factors");
  const auto& grid = factors.front().grid;
  int ambient = 0;
  for (const auto& f : factors) {
    f.validate();
    if (f.grid != grid) throw std::invalid_argument("product_kernel: factors must share one grid");
    ambient += f.dim();
  }
  KernelPath p;
  p.grid = grid;
  p.label = "product";
  int offset = 0;
  for (const auto& f : factors) {
    KernelPath e = f;
    for (auto& k : e.kernels) k = embed(k, ambient, offset);
    e.factors.clear();
    offset += f.dim();
    p.order += f.order;
    p.factors.push_back(std::move(e));
  }
  if (!materialize_nodes) {
    p.nodes_materialized = false;
    return p;
  }
  double entry_estimate = 0;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    double node = 1;
    for (const auto& f : p.factors) node *= static_cast<double>(f.kernels[i].coeffs().size());
    entry_estimate += node;
  }
  if (entry_estimate > 4e6)
    throw std::length_error(
        "product_kernel: combined node kernels too large, pass materialize_nodes = false");
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    SymTensor f = p.factors.front().kernels[i];
    for (std::size_t m = 1; m < p.factors.size(); ++m)
      f = symmetrize_outer(f, p.factors[m].kernels[i]);
    p.kernels.push_back(std::move(f));
  }
  return p;
}

// d independent copies of one component process, embedded in disjoint blocks
// of a shared ambient space. Copy j of a product kernel keeps its own factor
// decomposition, re-embedded alongside it.
inline std::vector<KernelPath> independent_copies(const KernelPath& path, int copies) {
  if (copies < 1) throw std::invalid_argument("independent_copies: copies must be >= 1");
  path.validate();
  const int block = path.dim();
  const int ambient = block * copies;
  std::vector<KernelPath> out;
  for (int j = 0; j < copies; ++j) {
    KernelPath c = path;
    for (auto& k : c.kernels) k = embed(k, ambient, j * block);
    for (auto& f : c.factors)
      for (auto& k : f.kernels) k = embed(k, ambient, j * block);
    out.push_back(std::move(c));
  }
  return out;
}

// E[X_s X_t] = n! <f_s, f_t> at grid nodes. For a product of independent
// factors this is the product of the factor covariances.
inline double covariance(const KernelPath& p, int i, int j) {
  if (!p.nodes_materialized) {
    double r = 1;
    for (const auto& f : p.factors) r *= covariance(f, i, j);
    return r;
  }
  return factorial(p.order) * inner(p.at(i), p.at(j));
}

inline Mat covariance_matrix(const KernelPath& p) {
  const int n = p.nodes();
  Mat r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      r.at(i, j) = r.at(j, i) = covariance(p, i, j);
  return r;
}

// Rectangular increments of the covariance over elementary grid cells:
// cells(i, j) = E[X_{t_i, t_{i+1}} X_{t_j, t_{j+1}}].
inline Mat covariance_cells(const KernelPath& p) {
  const int m = p.cells();
  const double nf = factorial(p.order);
  std::vector<SymTensor> inc;
  inc.reserve(m);
  for (int i = 0; i < m; ++i) inc.push_back(p.increment(i, i + 1));
  Mat cells(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j)
      cells.at(i, j) = cells.at(j, i) = nf * inner(inc[i], inc[j]);
  return cells;
}

// ||R||_{rho-var} over the square [t_{i0}, t_{i1}]^2, root form.
inline Variation2DResult covariance_rho_var(const KernelPath& p, double rho, int i0, int i1) {
  if (!(0 <= i0 && i0 < i1 && i1 < p.nodes()))
    throw std::invalid_argument("covariance_rho_var: bad node range");
  const Mat full = covariance_cells(p);
  const int m = i1 - i0;
  Mat sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      sub.at(a, b) = full.at(i0 + a, i0 + b);
  return variation_2d(sub, rho);
}

// Two-parameter control evaluated on grid rectangles
// [t_{i0}, t_{i1}] x [t_{j0}, t_{j1}].
struct Control2D {
  std::string label;
  double rho = 1.0;
  std::vector<double> grid;
  std::function<double(int, int, int, int)> omega;

  double operator()(int i0, int i1, int j0, int j1) const {
    const int n = static_cast<int>(grid.size());
    if (!(0 <= i0 && i0 <= i1 && i1 < n && 0 <= j0 && j0 <= j1 && j1 < n))
      throw std::invalid_argument("Control2D: rectangle off the grid");
    if (i0 == i1 || j0 == j1) return 0.0;
    return omega(i0, i1, j0, j1);
  }
};

// omega([s,t] x [u,v]) = |[s,t] cap [u,v]|, the natural control for Brownian
// motion at rho = 1.
inline Control2D overlap_control(const std::vector<double>& grid) {
  validate_grid(grid);
  Control2D c;
  c.label = "overlap";
  c.rho = 1.0;
  c.grid = grid;
  c.omega = [grid](int i0, int i1, int j0, int j1) {
    const double lo = std::max(grid[i0], grid[j0]);
    const double hi = std::min(grid[i1], grid[j1]);
    return std::max(0.0, hi - lo);
  };
  return c;
}

// Control for product kernels built from the factor paths' rho-variation:
//   omega(R) = m^{rho-1} * K * sum_i a_i([s,t]) a_i([u,v]),
// where a_i is the rho-variation of factor i in power form over the interval
// and K = sum_i (||g^i||_{rho-var;[0,1]} + ||g^i_0||)^{2 rho}. For two factors
// this is the control exhibited alongside the product construction.
inline Control2D factor_variation_control(const KernelPath& product, double rho) {
  if (product.factors.empty())
    throw std::invalid_argument("factor_variation_control: kernel has no factor decomposition");
  if (rho < 1.0) throw std::invalid_argument("factor_variation_control: rho must be >= 1");
  const int n = product.nodes();
  const int m = static_cast<int>(product.factors.size());
  // a[f][i0 * n + i1] = rho-variation (power form) of factor f over [t_{i0}, t_{i1}].
  auto table = std::make_shared<std::vector<std::vector<double>>>(
      m, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
  double big_k = 0.0;
  for (int f = 0; f < m; ++f) {
    const auto& path = product.factors[f];
    const auto inc_norm = [&path](int i, int j) { return norm(path.increment(i, j)); };
    auto& t = (*table)[f];
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = i0 + 1; i1 < n; ++i1) {
        // One DP pass per start would be cheaper; full calls stay fast at desk scale.
        t[static_cast<std::size_t>(i0) * n + i1] = rho_var_pow_dp(i0, i1, inc_norm, rho);
      }
    const double var_root = std::pow(t[static_cast<std::size_t>(0) * n + (n - 1)], 1.0 / rho);
    big_k += std::pow(var_root + norm(path.at(0)), 2.0 * rho);
  }
  const double constant = std::pow(static_cast<double>(m), rho - 1.0) * big_k;
  Control2D c;
  c.label = "factor-variation";
  c.rho = rho;
  c.grid = product.grid;
  c.omega = [table, constant, n, m](int i0, int i1, int j0, int j1) {
    double s = 0.0;
    for (int f = 0; f < m; ++f) {
      const auto& t = (*table)[f];
      s += t[static_cast<std::size_t>(i0) * n + i1] * t[static_cast<std::size_t>(j0) * n + j1];
    }
    return constant * s;
  };
  return c;
}

// omega(R) >= omega(R1) + omega(R2) for every grid split of every grid
// rectangle along either axis.
inline bool control_superadditive(const Control2D& c, double tol = 1e-9) {
  const int n = static_cast<int>(c.grid.size());
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = i0 + 1; i1 < n; ++i1)
      for (int j0 = 0; j0 < n; ++j0)
        for (int j1 = j0 + 1; j1 < n; ++j1) {
          const double whole = c(i0, i1, j0, j1);
          for (int k = i0 + 1; k < i1; ++k)
            if (c(i0, k, j0, j1) + c(k, i1, j0, j1) > whole + tol * (1.0 + whole)) return false;
          for (int k = j0 + 1; k < j1; ++k)
            if (c(i0, i1, j0, k) + c(i0, i1, k, j1) > whole + tol * (1.0 + whole)) return false;
        }
  return true;
}

struct ClauseReport {
  std::string name;
  double max_ratio = 0.0;  // smallest admissible constant; pass means <= 1
  bool exact = true;       // suprema enumerated exhaustively
  bool pass = false;
};

struct AssumptionReport {
  double rho = 1.0;
  ClauseReport covariance_holder;          // ||R||^rho_{rho-var;[s,t]^2} <= |t-s|
  std::vector<ClauseReport> contraction;   // per r: ||f_{s,t} (x-hat)_r f_{u,v}|| <= omega^{1/rho}
  ClauseReport control_holder;             // omega([s,t]^2) <= |t-s|
  bool has_control = false;
  bool control_superadditive = false;

  // The clause pair that distinguishes genuine chaos regularity: every
  // contraction order dominated by the control. The Holder normalizations
  // carry constants that reparameterization would absorb, so they are
  // reported but not gating.
  bool contraction_pass() const {
    if (!has_control) return false;
    for (const auto& c : contraction)
      if (!c.pass) return false;
    return true;
  }
};

// Evaluate each regularity clause on the grid and report the smallest
// admissible constant per clause. A null control skips the contraction and
// control clauses.
inline AssumptionReport check_assumptions(const KernelPath& p, double rho,
                                          const Control2D* control = nullptr) {
  p.validate();
  if (!(rho >= 1.0 && rho < 1.5)) throw std::invalid_argument("check_assumptions: rho must lie in [1, 1.5)");
  AssumptionReport rep;
  rep.rho = rho;

  rep.covariance_holder.name = "covariance-holder";
  rep.covariance_holder.exact = true;
  {
    double worst = 0.0;
    for (int i0 = 0; i0 < p.nodes(); ++i0)
      for (int i1 = i0 + 1; i1 < p.nodes(); ++i1) {
        const auto v = covariance_rho_var(p, rho, i0, i1);
        if (!v.exact) rep.covariance_holder.exact = false;
        worst = std::max(worst, std::pow(v.value, rho) / (p.grid[i1] - p.grid[i0]));
      }
    rep.covariance_holder.max_ratio = worst;
    rep.covariance_holder.pass = rep.covariance_holder.exact && worst <= 1.0 + 1e-9;
  }

  if (control != nullptr) {
    rep.has_control = true;
    rep.control_superadditive = chaosrough::control_superadditive(*control);
    const int n = p.nodes();

    for (int r = 1; r <= p.order; ++r) {
      ClauseReport cr;
      cr.name = "contraction-r" + std::to_string(r);
      double worst = 0.0;
      for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = i0 + 1; i1 < n; ++i1)
          for (int j0 = 0; j0 < n; ++j0)
            for (int j1 = j0 + 1; j1 < n; ++j1) {
              const SymTensor a = p.increment(i0, i1);
              const SymTensor b = p.increment(j0, j1);
              const double lhs = norm(contract(a, b, r));
              const double w = (*control)(i0, i1, j0, j1);
              if (lhs <= 1e-14) continue;
              if (w <= 0.0) {
                worst = std::numeric_limits<double>::infinity();
                continue;
              }
              worst = std::max(worst, lhs / std::pow(w, 1.0 / rho));
            }
      cr.max_ratio = worst;
      cr.pass = worst <= 1.0 + 1e-9;
      rep.contraction.push_back(std::move(cr));
    }

    rep.control_holder.name = "control-holder";
    double worst = 0.0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = i0 + 1; i1 < n; ++i1)
        worst = std::max(worst, (*control)(i0, i1, i0, i1) / (p.grid[i1] - p.grid[i0]));
    rep.control_holder.max_ratio = worst;
    rep.control_holder.pass = worst <= 1.0 + 1e-9;
  }
  return rep;
}

}  // namespace chaosrough
