#pragma once
// Level-2 rough-path lifts over a grid.
//
// A lifted path stores level 1 as flat node vectors (components concatenated
// per the layout) and level 2 as cumulative signature blocks C_i = X2_{0,t_i};
// pair values recover via the Chen relation
//   X2_{s,t} = C_t - C_s - X_{0,s} (x) X_{s,t},
// so the Chen identity holds by construction up to roundoff. Piecewise-linear
// lifts put (1/2) dX (x) dX on each segment, which makes the lift geometric:
// the symmetric part of X2_{s,t} is (1/2) X_{s,t} (x) X_{s,t} for all pairs.
//
// Also here: p-variation of lifts (dynamic programming, with an exhaustive
// oracle for small grids), rough distances, path samplers driven by kernel
// paths, the normalized monomial basis with spectral truncation profiles, an
// embedding-norm inequality check, and the dyadic convergence experiment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaosrough/chaos.hpp"
#include "chaosrough/kernels.hpp"
#include "chaosrough/linalg.hpp"
#include "chaosrough/rng.hpp"
#include "chaosrough/symtensor.hpp"
#include "chaosrough/variation.hpp"

namespace chaosrough {

// One flattened component of a lifted path. deriv_order tags enhanced
// components (0 = the process itself); block_dim is the flattened size.
struct Comp {
  int deriv_order = 0;
  int block_dim = 1;
  int offset = 0;
};

struct CompLayout {
  std::vector<Comp> comps;
  int total = 0;

  static CompLayout scalars(int d) {
    CompLayout l;
    for (int j = 0; j < d; ++j) l.comps.push_back({0, 1, j});
    l.total = d;
    return l;
  }

  int count() const { return static_cast<int>(comps.size()); }

  void validate() const {
    int expect = 0;
    for (const auto& c : comps) {
      if (c.block_dim < 1 || c.offset != expect) throw std::invalid_argument("CompLayout: blocks must tile [0, total)");
      expect += c.block_dim;
    }
    if (expect != total) throw std::invalid_argument("CompLayout: total mismatch");
  }
};

struct Level2Path {
  std::vector<double> grid;
  CompLayout layout;
  std::vector<Vec> level1;       // one flat vector per node
  std::vector<Mat> cumulative2;  // X2_{0, t_i}

  int nodes() const { return static_cast<int>(grid.size()); }
  int width() const { return layout.total; }

  void check_pair(int i, int j) const {
    if (!(0 <= i && i <= j && j < nodes())) throw std::out_of_range("Level2Path: node pair out of range");
  }

  void increment1_into(int i, int j, Vec& out) const {
    check_pair(i, j);
    out.resize(level1[i].size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = level1[j][k] - level1[i][k];
  }

  Vec increment1(int i, int j) const {
    Vec v;
    increment1_into(i, j, v);
    return v;
  }

  void level2_into(int i, int j, Mat& out) const {
    check_pair(i, j);
    const int s = width();
    out.rows = out.cols = s;
    out.a.assign(cumulative2[j].a.begin(), cumulative2[j].a.end());
    const double* ci = cumulative2[i].a.data();
    for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] -= ci[k];
    const Vec& x0 = level1[0];
    const Vec& xi = level1[i];
    const Vec& xj = level1[j];
    for (int r = 0; r < s; ++r) {
      const double head = xi[r] - x0[r];
      if (head == 0.0) continue;
      double* row = &out.a[static_cast<std::size_t>(r) * s];
      for (int c = 0; c < s; ++c) row[c] -= head * (xj[c] - xi[c]);
    }
  }

  Mat level2(int i, int j) const {
    Mat m;
    level2_into(i, j, m);
    return m;
  }

  void validate() const {
    validate_grid(grid, false);
    layout.validate();
    if (level1.size() != grid.size() || cumulative2.size() != grid.size())
      throw std::invalid_argument("Level2Path: one value and one block per node required");
    for (const auto& v : level1)
      if (static_cast<int>(v.size()) != width()) throw std::invalid_argument("Level2Path: level-1 width mismatch");
    for (const auto& m : cumulative2)
      if (m.rows != width() || m.cols != width()) throw std::invalid_argument("Level2Path: level-2 shape mismatch");
  }
};

// Natural lift of the piecewise-linear interpolation of the given node
// values: each segment contributes (1/2) dX (x) dX.
inline Level2Path lift_piecewise_linear(const std::vector<double>& grid,
                                        const std::vector<Vec>& values,
                                        CompLayout layout = {}) {
  validate_grid(grid, false);
  if (values.size() != grid.size()) throw std::invalid_argument("lift_piecewise_linear: one value per node required");
  const int s = static_cast<int>(values.front().size());
  if (layout.comps.empty()) layout = CompLayout::scalars(s);
  layout.validate();
  if (layout.total != s) throw std::invalid_argument("lift_piecewise_linear: layout width mismatch");
  const std::size_t bytes = values.size() * static_cast<std::size_t>(s) * s * sizeof(double);
  if (bytes > (std::size_t{1} << 29))
    throw std::length_error("lift_piecewise_linear: level-2 storage would exceed 512 MB");

  Level2Path p;
  p.grid = grid;
  p.layout = layout;
  p.level1 = values;
  p.cumulative2.assign(values.size(), Mat(s, s));
  Vec dx(s), head(s);
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    Mat c = p.cumulative2[k];
    for (int a = 0; a < s; ++a) {
      dx[a] = values[k + 1][a] - values[k][a];
      head[a] = values[k][a] - values[0][a];
    }
    outer_accum(1.0, head, dx, c);
    outer_accum(0.5, dx, dx, c);
    p.cumulative2[k + 1] = std::move(c);
  }
  return p;
}

// Largest violation of the Chen identity over all node triples. Quadratic
// storage churn keeps this for small grids.
inline double chen_defect(const Level2Path& p) {
  const int n = p.nodes();
  if (n > 200) throw std::invalid_argument("chen_defect: grid too large for the full triple scan");
  double worst = 0.0;
  Mat whole, left, right;
  Vec a, b;
  for (int i = 0; i < n; ++i)
    for (int u = i; u < n; ++u)
      for (int j = u; j < n; ++j) {
        p.level2_into(i, j, whole);
        p.level2_into(i, u, left);
        p.level2_into(u, j, right);
        p.increment1_into(i, u, a);
        p.increment1_into(u, j, b);
        outer_accum(1.0, a, b, left);
        left += right;
        left -= whole;
        worst = std::max(worst, std::sqrt(frobenius2(left)));
      }
  return worst;
}

// Largest deviation of Sym(X2_{s,t}) from (1/2) X_{s,t} (x) X_{s,t} over all
// pairs; zero (up to roundoff) exactly for geometric lifts.
inline double symmetry_defect(const Level2Path& p) {
  const int n = p.nodes();
  const int s = p.width();
  double worst = 0.0;
  Mat m;
  Vec d;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      p.level2_into(i, j, m);
      p.increment1_into(i, j, d);
      double local = 0.0;
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
          const double sym = 0.5 * (m.at(a, b) + m.at(b, a));
          local = std::max(local, std::abs(sym - 0.5 * d[a] * d[b]));
        }
      worst = std::max(worst, local);
    }
  return worst;
}

// Concatenate two lifts meeting at a shared node, rebasing the tail's
// cumulative blocks through the Chen relation.
inline Level2Path chen_compose(const Level2Path& head, const Level2Path& tail, double tol = 1e-9) {
  head.validate();
  tail.validate();
  if (head.width() != tail.width()) throw std::invalid_argument("chen_compose: width mismatch");
  if (std::abs(head.grid.back() - tail.grid.front()) > tol)
    throw std::invalid_argument("chen_compose: grids do not meet");
  const Vec& join_head = head.level1.back();
  const Vec& join_tail = tail.level1.front();
  for (std::size_t k = 0; k < join_head.size(); ++k)
    if (std::abs(join_head[k] - join_tail[k]) > tol)
      throw std::invalid_argument("chen_compose: level-1 values disagree at the junction");

  Level2Path out = head;
  const int s = head.width();
  Vec head_inc(s);
  for (int k = 0; k < s; ++k) head_inc[k] = head.level1.back()[k] - head.level1.front()[k];
  for (int u = 1; u < tail.nodes(); ++u) {
    out.grid.push_back(tail.grid[u]);
    out.level1.push_back(tail.level1[u]);
    Mat c = head.cumulative2.back();
    c += tail.cumulative2[u];
    Vec tail_inc(s);
    for (int k = 0; k < s; ++k) tail_inc[k] = tail.level1[u][k] - tail.level1[0][k];
    outer_accum(1.0, head_inc, tail_inc, c);
    out.cumulative2.push_back(std::move(c));
  }
  return out;
}

struct PVarResult {
  double p = 2.0;
  double level1_pow = 0.0;  // sup sum |X_{s,t}|^p
  double level2_pow = 0.0;  // sup sum ||X2_{s,t}||^{p/2}

  double level1_norm() const { return std::pow(level1_pow, 1.0 / p); }
  double level2_norm() const { return std::pow(level2_pow, 2.0 / p); }
  double homogeneous() const { return std::pow(level1_pow + level2_pow, 1.0 / p); }
};

namespace detail {

template <typename L1, typename L2>
PVarResult pvar_with(const Level2Path& x, double p, int i0, int i1, L1&& inc1, L2&& inc2, bool exhaustive) {
  if (i1 < 0) i1 = x.nodes() - 1;
  x.check_pair(i0, i1);
  if (p <= 2.0) throw std::invalid_argument("p_variation: p must exceed 2");
  PVarResult r;
  r.p = p;
  if (exhaustive) {
    r.level1_pow = rho_var_pow_exhaustive(i0, i1, inc1, p);
    r.level2_pow = rho_var_pow_exhaustive(i0, i1, inc2, p / 2.0);
  } else {
    r.level1_pow = rho_var_pow_dp(i0, i1, inc1, p);
    r.level2_pow = rho_var_pow_dp(i0, i1, inc2, p / 2.0);
  }
  return r;
}

}  // namespace detail

inline PVarResult p_variation(const Level2Path& x, double p, int i0 = 0, int i1 = -1,
                              bool exhaustive = false) {
  auto bufv = std::make_shared<Vec>();
  auto bufm = std::make_shared<Mat>();
  const std::function<double(int, int)> inc1 = [&x, bufv](int i, int j) {
    x.increment1_into(i, j, *bufv);
    return norm2(*bufv);
  };
  const std::function<double(int, int)> inc2 = [&x, bufm](int i, int j) {
    x.level2_into(i, j, *bufm);
    return std::sqrt(frobenius2(*bufm));
  };
  return detail::pvar_with(x, p, i0, i1, inc1, inc2, exhaustive);
}

inline PVarResult p_variation_exhaustive(const Level2Path& x, double p, int i0 = 0, int i1 = -1) {
  return p_variation(x, p, i0, i1, true);
}

// Inhomogeneous rough distance: p-variation (and p/2-variation) of the
// pairwise differences of two lifts on one grid.
inline PVarResult rough_distance(const Level2Path& x, const Level2Path& y, double p) {
  if (x.grid != y.grid || x.width() != y.width())
    throw std::invalid_argument("rough_distance: lifts must share grid and width");
  auto va = std::make_shared<Vec>();
  auto vb = std::make_shared<Vec>();
  auto ma = std::make_shared<Mat>();
  auto mb = std::make_shared<Mat>();
  const std::function<double(int, int)> inc1 = [&x, &y, va, vb](int i, int j) {
    x.increment1_into(i, j, *va);
    y.increment1_into(i, j, *vb);
    double s = 0.0;
    for (std::size_t k = 0; k < va->size(); ++k) {
      const double d = (*va)[k] - (*vb)[k];
      s += d * d;
    }
    return std::sqrt(s);
  };
  const std::function<double(int, int)> inc2 = [&x, &y, ma, mb](int i, int j) {
    x.level2_into(i, j, *ma);
    y.level2_into(i, j, *mb);
    double s = 0.0;
    for (std::size_t k = 0; k < ma->a.size(); ++k) {
      const double d = ma->a[k] - mb->a[k];
      s += d * d;
    }
    return std::sqrt(s);
  };
  return detail::pvar_with(x, p, 0, x.nodes() - 1, inc1, inc2, false);
}

// Homogeneous 1/p-Holder constant of the lift.
inline double holder_norm(const Level2Path& x, double p) {
  double worst = 0.0;
  Vec v;
  Mat m;
  for (int i = 0; i < x.nodes(); ++i)
    for (int j = i + 1; j < x.nodes(); ++j) {
      const double dt = std::pow(x.grid[j] - x.grid[i], 1.0 / p);
      x.increment1_into(i, j, v);
      x.level2_into(i, j, m);
      worst = std::max(worst, norm2(v) / dt);
      worst = std::max(worst, std::sqrt(std::sqrt(frobenius2(m))) / dt);
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Sampling chaos paths driven by kernel paths.

// Evaluates node values of d components sharing one ambient Gaussian space.
// Product kernels are evaluated factor-by-factor (exact, since disjoint
// blocks make the combined chaos the pointwise product of its factors);
// everything else accumulates increment kernels.
struct PathSampler {
  int ambient = 0;
  std::vector<double> grid;

  struct CompPlan {
    std::vector<std::vector<ChaosVariable>> streams;  // per factor: start chaos then one increment per cell
    bool product = false;
  };
  std::vector<CompPlan> comps;

  int dimension() const { return static_cast<int>(comps.size()); }

  std::vector<Vec> sample(Rng& rng) const {
    const GaussianSample w = sample_gaussian(ambient, rng);
    return evaluate(w);
  }

  std::vector<Vec> evaluate(const GaussianSample& w) const {
    const int nodes = static_cast<int>(grid.size());
    std::vector<Vec> out(nodes, Vec(comps.size(), 1.0));
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& plan = comps[c];
      if (!plan.product) {
        double acc = 0.0;
        const auto& stream = plan.streams.front();
        for (int i = 0; i < nodes; ++i) {
          acc += eval_chaos(stream[i], w);
          out[i][c] = acc;
        }
      } else {
        for (int i = 0; i < nodes; ++i) out[i][c] = 1.0;
        for (const auto& stream : plan.streams) {
          double acc = 0.0;
          for (int i = 0; i < nodes; ++i) {
            acc += eval_chaos(stream[i], w);
            out[i][c] *= acc;
          }
        }
      }
    }
    return out;
  }
};

inline PathSampler make_sampler(const std::vector<KernelPath>& comps) {
  if (comps.empty()) throw std::invalid_argument("make_sampler: no components");
  PathSampler s;
  s.grid = comps.front().grid;
  for (const auto& comp : comps) {
    comp.validate();
    if (comp.grid != s.grid) throw std::invalid_argument("make_sampler: components must share one grid");
    s.ambient = std::max(s.ambient, comp.dim());
    PathSampler::CompPlan plan;
    plan.product = !comp.factors.empty();
    const auto stream_of = [](const KernelPath& p) {
      std::vector<ChaosVariable> stream;
      stream.push_back(ChaosVariable{p.at(0)});
      for (int i = 0; i + 1 < p.nodes(); ++i) stream.push_back(ChaosVariable{p.increment(i, i + 1)});
      return stream;
    };
    if (plan.product) {
      for (const auto& f : comp.factors) {
        plan.streams.push_back(stream_of(f));
        s.ambient = std::max(s.ambient, f.dim());
      }
    } else {
      plan.streams.push_back(stream_of(comp));
    }
    s.comps.push_back(std::move(plan));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Normalized monomial basis and spectral truncation.

struct MonomialBasis {
  int order = 0;
  int dim = 0;
  std::vector<MultiIndex> index;
  std::vector<SymTensor> phi;  // unit vectors: e-hat_alpha sqrt(n!/alpha!)

  int size() const { return static_cast<int>(phi.size()); }
};

inline MonomialBasis monomial_basis(int order, int dim) {
  MonomialBasis b;
  b.order = order;
  b.dim = dim;
  b.index = all_multi_indices(order, dim);
  for (const auto& alpha : b.index) {
    SymTensor t(order, dim);
    t.add(alpha, std::sqrt(factorial(order) / multiplicity_factorial(alpha)));
    b.phi.push_back(std::move(t));
  }
  return b;
}

inline Vec basis_coefficients(const SymTensor& f, const MonomialBasis& b) {
  if (f.order() != b.order || f.dim() != b.dim)
    throw std::invalid_argument("basis_coefficients: shape mismatch");
  Vec c(b.phi.size());
  for (std::size_t a = 0; a < b.phi.size(); ++a) c[a] = inner(f, b.phi[a]);
  return c;
}

// Kernel path with every node kernel projected onto the first K basis
// elements (the spectral truncation of the process).
inline KernelPath kl_partial_sum(const KernelPath& p, const MonomialBasis& b, int truncation) {
  if (truncation < 0 || truncation > b.size()) throw std::invalid_argument("kl_partial_sum: truncation out of range");
  KernelPath out;
  out.order = p.order;
  out.grid = p.grid;
  out.label = p.label + "-trunc" + std::to_string(truncation);
  for (const auto& f : p.kernels) {
    SymTensor g(p.order, p.dim());
    for (int a = 0; a < truncation; ++a) {
      SymTensor term = b.phi[a];
      term *= inner(f, b.phi[a]);
      g += term;
    }
    g.prune();
    out.kernels.push_back(std::move(g));
  }
  return out;
}

// E[(X^K_{s,t})^2] for K = 0..size: cumulative sums of squared coefficients
// times n!, so the profile is nondecreasing term by term.
inline Vec kl_level1_profile(const KernelPath& p, const MonomialBasis& b, int i, int j) {
  const Vec c = basis_coefficients(p.increment(i, j), b);
  Vec prof(c.size() + 1, 0.0);
  const double nf = factorial(p.order);
  for (std::size_t a = 0; a < c.size(); ++a) prof[a + 1] = prof[a] + nf * c[a] * c[a];
  return prof;
}

// Second moment of the grid iterated integral int X^{K;i} dX^{K;j} between
// two independent copies, as a function of the truncation K. Identifying the
// product of independent factors with a tensor in L^2 (x) L^2, truncation is
// a projection, so the profile accumulates squares and is nondecreasing.
inline Vec kl_level2_cross_profile(const KernelPath& p, const MonomialBasis& b, int i, int j) {
  p.validate();
  if (!(0 <= i && i < j && j < p.nodes())) throw std::invalid_argument("kl_level2_cross_profile: bad node pair");
  const int m = b.size();
  Mat t(m, m);
  Vec left(m), right(m);
  for (int u = i; u < j; ++u) {
    // trapezoid weight: X_{s,u} + (1/2) dX_u averages the integrand over the cell
    SymTensor mid = p.increment(i, u);
    SymTensor half = p.increment(u, u + 1);
    half *= 0.5;
    mid += half;
    const Vec a = basis_coefficients(mid, b);
    const Vec c = basis_coefficients(p.increment(u, u + 1), b);
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y) t.at(x, y) += a[x] * c[y];
  }
  const double nf = factorial(p.order);
  Vec prof(m + 1, 0.0);
  for (int k = 1; k <= m; ++k) {
    double add = 0.0;
    for (int y = 0; y < k; ++y) add += t.at(k - 1, y) * t.at(k - 1, y);
    for (int x = 0; x < k - 1; ++x) add += t.at(x, k - 1) * t.at(x, k - 1);
    prof[k] = prof[k - 1] + nf * nf * add;
  }
  return prof;
}

// E[(X2^{K;i,i}_{s,t})^2] = (1/4) E[(X^K_{s,t})^4] for the geometric lift;
// evaluated exactly through the product formula at each truncation.
inline Vec kl_level2_diag_profile(const KernelPath& p, const MonomialBasis& b, int i, int j) {
  const SymTensor inc = p.increment(i, j);
  const Vec c = basis_coefficients(inc, b);
  Vec prof(c.size() + 1, 0.0);
  SymTensor g(p.order, p.dim());
  for (std::size_t a = 0; a < c.size(); ++a) {
    SymTensor term = b.phi[a];
    term *= c[a];
    g += term;
    prof[a + 1] = 0.25 * fourth_moment(ChaosVariable{g});
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Embedding inequality: the rho-variation of t -> <f_t, phi> is controlled by
// ||phi|| sqrt(||R||_{rho-var} / n!), with both suprema over grid partitions.
struct EmbeddingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool exact = false;
  bool pass = false;
};

inline EmbeddingCheck embedding_norm_check(const KernelPath& p, const SymTensor& phi, double rho) {
  p.validate();
  Vec values(p.nodes());
  for (int i = 0; i < p.nodes(); ++i) values[i] = inner(p.at(i), phi);
  const auto inc = [&values](int i, int j) { return std::abs(values[j] - values[i]); };
  EmbeddingCheck c;
  c.lhs = std::pow(rho_var_pow_dp(0, p.nodes() - 1, inc, rho), 1.0 / rho);
  const auto rvar = variation_2d(covariance_cells(p), rho);
  c.exact = rvar.exact;
  c.rhs = norm(phi) * std::sqrt(rvar.value / factorial(p.order));
  c.pass = c.exact && c.lhs <= c.rhs + 1e-10 * (1.0 + c.rhs);
  return c;
}

// ---------------------------------------------------------------------------
// Dyadic convergence of piecewise-linear lifts.

struct ConvergenceReport {
  std::vector<int> levels;
  std::vector<double> mean_sq_distance;  // E[d_p(lift_l, ref)^2]
  std::vector<double> se_sq_distance;
  std::vector<double> drop_mean;  // paired d_l^2 - d_{l+1}^2
  std::vector<double> drop_se;
  bool strictly_decreasing = false;  // every paired drop clears 2 SE
};

// Restrict fine node values to the 2^level sub-grid and linearly interpolate
// back onto the fine grid.
inline std::vector<Vec> restrict_dyadic(const std::vector<Vec>& fine, int level, int ref_level) {
  if (level > ref_level) throw std::invalid_argument("restrict_dyadic: level exceeds reference");
  const int stride = 1 << (ref_level - level);
  const int cells = 1 << ref_level;
  if (static_cast<int>(fine.size()) != cells + 1) throw std::invalid_argument("restrict_dyadic: size mismatch");
  std::vector<Vec> out(fine.size());
  for (int m = 0; m <= cells; ++m) {
    const int lo = (m / stride) * stride;
    const int hi = std::min(lo + stride, cells);
    const double w = (m == lo) ? 0.0 : static_cast<double>(m - lo) / (hi - lo);
    Vec v(fine[m].size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - w) * fine[lo][k] + w * fine[hi][k];
    out[m] = std::move(v);
  }
  return out;
}

// Sample the process exactly on the dyadic reference grid, lift the
// piecewise-linear restrictions at each level, and measure the squared rough
// distance to the reference lift. The component kernel must live on the
// reference grid. Second moments are averaged over samples; adjacent levels
// are compared pairwise per sample.
inline ConvergenceReport dyadic_convergence(const KernelPath& component, int d, int level_lo,
                                            int level_hi, int ref_level, double p, int samples,
                                            const Rng& rng) {
  if (d < 1) throw std::invalid_argument("dyadic_convergence: dimension must be >= 1");
  if (!(0 < level_lo && level_lo <= level_hi && level_hi <= ref_level))
    throw std::invalid_argument("dyadic_convergence: bad level range");
  if (component.cells() != (1 << ref_level))
    throw std::invalid_argument("dyadic_convergence: component must live on the dyadic reference grid");
  if (samples < 2) throw std::invalid_argument("dyadic_convergence: need at least two samples");

  const PathSampler sampler = make_sampler(independent_copies(component, d));
  const int nlev = level_hi - level_lo + 1;
  std::vector<double> sum(nlev, 0.0), sum2(nlev, 0.0);
  std::vector<double> dsum(nlev - 1, 0.0), dsum2(nlev - 1, 0.0);

  for (int s = 0; s < samples; ++s) {
    Rng stream = rng.child(static_cast<std::uint64_t>(s));
    const std::vector<Vec> fine = sampler.sample(stream);
    const Level2Path ref = lift_piecewise_linear(sampler.grid, fine);
    std::vector<double> dist(nlev);
    for (int l = level_lo; l <= level_hi; ++l) {
      const Level2Path approx = lift_piecewise_linear(sampler.grid, restrict_dyadic(fine, l, ref_level));
      const double dd = rough_distance(approx, ref, p).homogeneous();
      dist[l - level_lo] = dd * dd;
    }
    for (int k = 0; k < nlev; ++k) {
      sum[k] += dist[k];
      sum2[k] += dist[k] * dist[k];
    }
    for (int k = 0; k + 1 < nlev; ++k) {
      const double drop = dist[k] - dist[k + 1];
      dsum[k] += drop;
      dsum2[k] += drop * drop;
    }
  }

  ConvergenceReport rep;
  rep.strictly_decreasing = true;
  for (int k = 0; k < nlev; ++k) {
    const double mean = sum[k] / samples;
    const double var = std::max(0.0, sum2[k] / samples - mean * mean);
    rep.levels.push_back(level_lo + k);
    rep.mean_sq_distance.push_back(mean);
    rep.se_sq_distance.push_back(std::sqrt(var / samples));
  }
  for (int k = 0; k + 1 < nlev; ++k) {
    const double mean = dsum[k] / samples;
    const double var = std::max(0.0, dsum2[k] / samples - mean * mean);
    const double se = std::sqrt(var / samples);
    rep.drop_mean.push_back(mean);
    rep.drop_se.push_back(se);
    if (!(mean > 2.0 * se)) rep.strictly_decreasing = false;
  }
  return rep;
}

}  // namespace chaosrough
