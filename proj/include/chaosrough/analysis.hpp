#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "enhanced.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "roughlift.hpp"

namespace chaosrough {

// ---------------------------------------------------------------------------
// Greedy partition functionals.

struct GreedyOptions {
  bool use_level2 = true;  // false restricts the cost to the level-1 power sum
};

// p-variation power of the window [i, j], the additive cost all partition
// functionals below share. Superadditive under concatenation and nondecreasing
// in the right endpoint. The level-1-only mode accepts any p >= 1 (used for
// classical-variation examples below the rough regime).
inline double interval_cost(const Level2Path& x, double p, int i, int j,
                            const GreedyOptions& opt = {}) {
  if (!opt.use_level2) {
    auto buf = std::make_shared<Vec>();
    const std::function<double(int, int)> inc1 = [&x, buf](int a, int b) {
      x.increment1_into(a, b, *buf);
      return norm2(*buf);
    };
    return rho_var_pow_dp(i, j, inc1, p);
  }
  const PVarResult r = p_variation(x, p, i, j);
  return r.level1_pow + r.level2_pow;
}

struct PartitionStats {
  double alpha = 0;
  double p = 2;
  std::vector<double> taus;     // greedy crossing times; the final entry is the window end
  int N = 0;                    // crossings strictly before the end
  double M_accumulated = 0;     // greedy value: alpha per completed interval plus the open tail
  double homogeneous_norm_p = 0;  // cost of the whole window
  bool alpha_bound_ok = false;    // alpha*N <= homogeneous_norm_p
  bool certificate_ok = false;    // M_accumulated <= alpha*(2N+1)
};

// First-crossing greedy partition: from each start node, bisect for the first
// grid node whose interval cost reaches alpha (the cost is nondecreasing in
// the right endpoint). Every completed interval has cost >= alpha, so
// alpha*N <= cost([0,1]) is exact on the grid. Each completed interval is
// counted at alpha in M_accumulated (the value the continuum greedy assigns,
// where crossings stop at equality), which makes M <= alpha*(N+1) structural.
inline PartitionStats greedy(const Level2Path& x, double alpha, double p, GreedyOptions opt = {}) {
  if (!(alpha > 0)) throw std::invalid_argument("greedy: alpha must be positive");
  if (!(p >= 1)) throw std::invalid_argument("greedy: p must be >= 1");
  x.validate();
  const int last = x.nodes() - 1;

  PartitionStats st;
  st.alpha = alpha;
  st.p = p;
  st.homogeneous_norm_p = interval_cost(x, p, 0, last, opt);

  int start = 0;
  while (start < last) {
    int next;
    if (interval_cost(x, p, start, last, opt) < alpha) {
      next = last;
    } else {
      int lo = start + 1, hi = last;  // first node with cost >= alpha
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (interval_cost(x, p, start, mid, opt) >= alpha)
          hi = mid;
        else
          lo = mid + 1;
      }
      next = lo;
    }
    const bool crossed = interval_cost(x, p, start, next, opt) >= alpha;
    st.taus.push_back(x.grid[static_cast<std::size_t>(next)]);
    if (crossed) {
      st.M_accumulated += alpha;
      if (next < last) ++st.N;
    } else {
      st.M_accumulated += interval_cost(x, p, start, next, opt);
    }
    start = next;
  }
  st.alpha_bound_ok = alpha * st.N <= st.homogeneous_norm_p * (1 + 1e-12) + 1e-15;
  st.certificate_ok = st.M_accumulated <= alpha * (2 * st.N + 1) * (1 + 1e-12) + 1e-15;
  return st;
}

struct AdmissiblePartition {
  std::vector<int> breaks;  // node indices, first 0 and last the window end
  double total = 0;
  bool exists = false;  // false when some single cell already exceeds alpha
};

// Dynamic program for the accumulated-variation supremum over partitions
// whose every interval cost stays <= alpha. The inner scan walks the left
// endpoint backwards and stops at the first inadmissible interval (cost grows
// as the interval widens).
inline AdmissiblePartition admissible_partition_sup(const Level2Path& x, double alpha, double p,
                                                    GreedyOptions opt = {}) {
  if (!(alpha > 0)) throw std::invalid_argument("admissible_partition_sup: alpha must be positive");
  x.validate();
  const int last = x.nodes() - 1;
  const double none = -std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(last + 1), none);
  std::vector<int> parent(static_cast<std::size_t>(last + 1), -1);
  best[0] = 0.0;
  for (int j = 1; j <= last; ++j)
    for (int i = j - 1; i >= 0; --i) {
      const double c = interval_cost(x, p, i, j, opt);
      if (c > alpha) break;
      if (best[static_cast<std::size_t>(i)] == none) continue;
      const double cand = best[static_cast<std::size_t>(i)] + c;
      if (cand > best[static_cast<std::size_t>(j)]) {
        best[static_cast<std::size_t>(j)] = cand;
        parent[static_cast<std::size_t>(j)] = i;
      }
    }
  AdmissiblePartition out;
  out.exists = best[static_cast<std::size_t>(last)] != none;
  if (!out.exists) return out;
  out.total = best[static_cast<std::size_t>(last)];
  for (int at = last; at >= 0; at = parent[static_cast<std::size_t>(at)]) {
    out.breaks.push_back(at);
    if (at == 0) break;
  }
  std::reverse(out.breaks.begin(), out.breaks.end());
  return out;
}

// ---------------------------------------------------------------------------
// Tail Monte Carlo for the greedy interval count.

struct TailReport {
  std::vector<int> thresholds;
  std::vector<int> exceed;
  std::vector<double> survival;
  std::vector<double> wilson_lo;
  std::vector<double> wilson_hi;
  std::vector<int> used;  // 1 when the point enters the fit: >= 20 exceedances and
                          // survival <= 0.9 (the bound is asymptotic, so the fit
                          // restricts to the genuine tail regime)
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  bool degenerate = true;  // too few usable points for a fit
  int samples = 0;
  double alpha = 0;
  double p = 0;
  int order = 0;
  double median_norm_p = 0;  // empirical scale estimate for the tail constants
};

// Tabulate per-sample crossing counts against each threshold, with Wilson
// intervals, and fit log-survival versus M^{2/(n p)}. Split from tail_scan so
// callers that parallelize the sampling loop can reuse the reduction; the
// tabulation order is fixed, so the report depends only on the inputs.
inline TailReport tail_fit(const std::vector<int>& crossings, const std::vector<double>& norm_pows,
                           int order, double alpha, double p, const std::vector<int>& thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("tail_fit: no thresholds");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("tail_fit: thresholds must increase");
  if (crossings.empty() || crossings.size() != norm_pows.size())
    throw std::invalid_argument("tail_fit: need one crossing count and one norm per sample");
  const int samples = static_cast<int>(crossings.size());

  TailReport rep;
  rep.thresholds = thresholds;
  rep.samples = samples;
  rep.alpha = alpha;
  rep.p = p;
  rep.order = order;
  rep.exceed.assign(thresholds.size(), 0);
  for (int s = 0; s < samples; ++s)
    for (std::size_t m = 0; m < thresholds.size(); ++m)
      if (crossings[static_cast<std::size_t>(s)] > thresholds[m])
        ++rep.exceed[static_cast<std::size_t>(m)];
  std::vector<double> norms = norm_pows;
  std::nth_element(norms.begin(), norms.begin() + samples / 2, norms.end());
  rep.median_norm_p = norms[static_cast<std::size_t>(samples / 2)];

  const double z = 1.959963984540054;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int npts = 0;
  for (std::size_t m = 0; m < thresholds.size(); ++m) {
    const double x = rep.exceed[m];
    const double n = samples;
    const double center = (x + z * z / 2) / (n + z * z);
    const double half = z * std::sqrt(x * (n - x) / n + z * z / 4) / (n + z * z);
    rep.survival.push_back(x / n);
    rep.wilson_lo.push_back(std::max(0.0, center - half));
    rep.wilson_hi.push_back(std::min(1.0, center + half));
    const bool use = rep.exceed[m] >= 20 && rep.survival.back() <= 0.9;
    rep.used.push_back(use ? 1 : 0);
    if (use) {
      const double fx = std::pow(static_cast<double>(thresholds[m]), 2.0 / (rep.order * p));
      const double fy = std::log(rep.survival.back());
      sx += fx;
      sy += fy;
      sxx += fx * fx;
      sxy += fx * fy;
      syy += fy * fy;
      ++npts;
    }
  }
  if (npts >= 3) {
    const double det = npts * sxx - sx * sx;
    if (det > 0) {
      rep.slope = (npts * sxy - sx * sy) / det;
      rep.intercept = (sy - rep.slope * sx) / npts;
      const double ss_tot = syy - sy * sy / npts;
      double ss_res = 0;
      for (std::size_t m = 0; m < thresholds.size(); ++m)
        if (rep.used[m]) {
          const double fx = std::pow(static_cast<double>(thresholds[m]), 2.0 / (rep.order * p));
          const double r = std::log(rep.survival[m]) - (rep.intercept + rep.slope * fx);
          ss_res += r * r;
        }
      rep.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
      rep.degenerate = false;
    }
  }
  return rep;
}

// Survival of N_alpha across samples against each threshold, with Wilson
// intervals, fitted as log-survival versus M^{2/(n p)}. Qualitative by design:
// the tail constants are not computable, only the decay shape is testable.
inline TailReport tail_scan(const KernelPath& k, double alpha, double p,
                            const std::vector<int>& thresholds, int samples, const Rng& rng,
                            GreedyOptions opt = {}) {
  if (thresholds.empty()) throw std::invalid_argument("tail_scan: no thresholds");
  if (samples < 100) throw std::invalid_argument("tail_scan: need at least 100 samples");
  const PathSampler sampler = make_sampler({k});
  std::vector<int> crossings(static_cast<std::size_t>(samples));
  std::vector<double> norms(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Rng stream = rng.child(static_cast<std::uint64_t>(s));
    const Level2Path x = lift_piecewise_linear(sampler.grid, sampler.sample(stream));
    const PartitionStats st = greedy(x, alpha, p, opt);
    crossings[static_cast<std::size_t>(s)] = st.N;
    norms[static_cast<std::size_t>(s)] = st.homogeneous_norm_p;
  }
  return tail_fit(crossings, norms, k.order, alpha, p, thresholds);
}

// ---------------------------------------------------------------------------
// Rate function: minimize the Cameron-Martin energy under skeleton constraints.

// <f, h^{(x)n}> as a raw full-tensor contraction: each stored sorted index
// tuple contributes coeff * multiplicity * prod h_i^{alpha_i}.
inline double chaos_skeleton(const SymTensor& f, const Vec& h) {
  if (f.dim() != static_cast<int>(h.size()))
    throw std::invalid_argument("chaos_skeleton: dimension mismatch");
  const double n_fact = factorial(f.order());
  double out = 0;
  for (const auto& [idx, c] : f.coeffs()) {
    double term = c * n_fact / multiplicity_factorial(idx);
    for (int i : idx) term *= h[static_cast<std::size_t>(i)];
    out += term;
  }
  return out;
}

// grad += scale * d/dh <f, h^{(x)n}>.
inline void chaos_skeleton_grad(const SymTensor& f, const Vec& h, double scale, Vec& grad) {
  const double n_fact = factorial(f.order());
  for (const auto& [idx, c] : f.coeffs()) {
    const double base = c * n_fact / multiplicity_factorial(idx);
    // run-length groups of the sorted tuple; differentiate each group's power
    std::size_t a = 0;
    while (a < idx.size()) {
      std::size_t b = a;
      while (b < idx.size() && idx[b] == idx[a]) ++b;
      const int i = idx[a];
      const int m = static_cast<int>(b - a);
      double term = base * m;
      for (int q = 0; q < m - 1; ++q) term *= h[static_cast<std::size_t>(i)];
      for (std::size_t q = 0; q < idx.size(); ++q)
        if (q < a || q >= b) term *= h[static_cast<std::size_t>(idx[q])];
      grad[static_cast<std::size_t>(i)] += scale * term;
      a = b;
    }
  }
}

enum class RateStatus { feasible, infeasible, no_converge };

struct RateResult {
  std::vector<double> target;
  Vec h_star;
  double value = 0;     // 0.5 * |h_star|^2
  double residual = 0;  // max constraint violation at h_star
  RateStatus status = RateStatus::no_converge;
  std::vector<double> restart_residuals;  // best residual reached per restart
};

struct RateOptions {
  int multistarts = 32;
  int outer_rounds = 14;
  int inner_iters = 250;
  double tol = 1e-6;
  std::uint64_t seed = 77;
};

namespace detail {

struct RateProblem {
  const std::vector<SymTensor>* kernels;
  const std::vector<double>* target;
  std::vector<int> nodes;  // constraint node indices
  int dim = 0;

  void residuals(const Vec& h, Vec& r) const {
    for (std::size_t t = 0; t < nodes.size(); ++t)
      r[t] = chaos_skeleton((*kernels)[static_cast<std::size_t>(nodes[t])], h) -
             (*target)[static_cast<std::size_t>(nodes[t])];
  }

  double augmented(const Vec& h, const Vec& lambda, double mu, Vec& r) const {
    residuals(h, r);
    double val = 0.5 * dot(h, h);
    for (std::size_t t = 0; t < r.size(); ++t) val += lambda[t] * r[t] + 0.5 * mu * r[t] * r[t];
    return val;
  }

  void augmented_grad(const Vec& h, const Vec& lambda, double mu, const Vec& r, Vec& g) const {
    g = h;
    for (std::size_t t = 0; t < nodes.size(); ++t)
      chaos_skeleton_grad((*kernels)[static_cast<std::size_t>(nodes[t])], h, lambda[t] + mu * r[t],
                          g);
  }
};

// L-BFGS (memory 8) with Armijo backtracking on the augmented Lagrangian.
inline void lbfgs_minimize(const RateProblem& prob, const Vec& lambda, double mu, int iters,
                           Vec& h) {
  const int m = 8;
  std::vector<Vec> s_hist, y_hist;
  std::vector<double> rho_hist;
  Vec r(prob.nodes.size()), g(h.size()), g_prev(h.size()), h_prev(h.size());
  double f = prob.augmented(h, lambda, mu, r);
  prob.augmented_grad(h, lambda, mu, r, g);
  for (int it = 0; it < iters; ++it) {
    const double gnorm = norm2(g);
    if (gnorm < 1e-12 * (1.0 + std::abs(f))) break;
    // two-loop recursion
    Vec q = g;
    std::vector<double> alpha_hist(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha_hist[i] = rho_hist[i] * dot(s_hist[i], q);
      axpy(-alpha_hist[i], y_hist[i], q);
    }
    if (!s_hist.empty()) {
      const Vec& s = s_hist.back();
      const Vec& y = y_hist.back();
      const double gamma = dot(s, y) / std::max(dot(y, y), 1e-300);
      for (auto& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      axpy(alpha_hist[i] - beta, s_hist[i], q);
    }
    // q is the ascent-scaled direction; step downhill
    double dir_dot = -dot(q, g);
    if (dir_dot >= 0) {  // fall back to steepest descent
      q = g;
      for (auto& v : q) v /= gnorm;
      dir_dot = -gnorm;
    }
    h_prev = h;
    g_prev = g;
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec trial = h_prev;
      axpy(-step, q, trial);
      const double ft = prob.augmented(trial, lambda, mu, r);
      if (ft <= f + 1e-4 * step * dir_dot) {
        h = trial;
        f = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    prob.augmented_grad(h, lambda, mu, r, g);
    Vec s = sub(h, h_prev);
    Vec y = sub(g, g_prev);
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm2(s) * norm2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > m) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
  }
}

}  // namespace detail

// Least Cameron-Martin energy 0.5|h|^2 subject to <f_t, h^{(x)n}> = x_t at
// every grid node. Order 1 admits the closed-form least-norm solution through
// the Gram matrix; it seeds the first restart. Higher orders run multi-start
// augmented-Lagrangian L-BFGS and report the residual floor when no start
// reaches feasibility (the certificate of "no such h found").
inline RateResult rate_function(const KernelPath& k, const std::vector<double>& target,
                                RateOptions opts = {}) {
  if (!k.nodes_materialized)
    throw std::invalid_argument("rate_function: needs materialized node kernels");
  if (target.size() != k.grid.size())
    throw std::invalid_argument("rate_function: target must live on the kernel grid");
  if (opts.multistarts < 1) throw std::invalid_argument("rate_function: need at least one start");
  const int dim = k.dim();
  const int nodes = static_cast<int>(k.grid.size());

  RateResult res;
  res.target = target;
  res.h_star.assign(static_cast<std::size_t>(dim), 0.0);

  detail::RateProblem prob;
  prob.kernels = &k.kernels;
  prob.target = &target;
  prob.dim = dim;
  for (int t = 0; t < nodes; ++t) prob.nodes.push_back(t);

  double target_abs = 0;
  for (double v : target) target_abs = std::max(target_abs, std::abs(v));
  const double tol = opts.tol * (1.0 + target_abs);

  // order-1 closed form: h = F^T lambda with Gram(F F^T) lambda = x
  Vec seed_h;
  if (k.order == 1) {
    Mat gram(nodes, nodes);
    for (int i = 0; i < nodes; ++i)
      for (int j = i; j < nodes; ++j) {
        const double g = covariance(k, i, j);
        gram.at(i, j) = g;
        gram.at(j, i) = g;
      }
    for (int i = 0; i < nodes; ++i) gram.at(i, i) += 1e-10;
    const Vec lambda = solve_spd(gram, target);
    seed_h.assign(static_cast<std::size_t>(dim), 0.0);
    for (int t = 0; t < nodes; ++t)
      for (const auto& [idx, c] : k.kernels[static_cast<std::size_t>(t)].coeffs())
        seed_h[static_cast<std::size_t>(idx[0])] += lambda[static_cast<std::size_t>(t)] * c;
  }

  Rng rng(opts.seed);
  double best_obj = std::numeric_limits<double>::infinity();
  bool any_feasible = false;
  double residual_floor = std::numeric_limits<double>::infinity();
  Vec r(prob.nodes.size());

  for (int start = 0; start < opts.multistarts; ++start) {
    Rng stream = rng.child(static_cast<std::uint64_t>(start));
    Vec h(static_cast<std::size_t>(dim));
    if (start == 0 && !seed_h.empty()) {
      h = seed_h;
    } else {
      for (auto& v : h) v = stream.normal() * (0.3 + 1.2 * stream.uniform());
    }
    Vec lambda(prob.nodes.size(), 0.0);
    double mu = 10.0;
    double prev_res = std::numeric_limits<double>::infinity();
    double best_here = std::numeric_limits<double>::infinity();
    for (int round = 0; round < opts.outer_rounds; ++round) {
      detail::lbfgs_minimize(prob, lambda, mu, opts.inner_iters, h);
      prob.residuals(h, r);
      double res_inf = 0;
      for (double v : r) res_inf = std::max(res_inf, std::abs(v));
      best_here = std::min(best_here, res_inf);
      if (res_inf <= tol) break;
      for (std::size_t t = 0; t < r.size(); ++t) lambda[t] += mu * r[t];
      if (res_inf > 0.25 * prev_res) mu = std::min(mu * 10.0, 1e9);
      prev_res = res_inf;
    }
    prob.residuals(h, r);
    double res_inf = 0;
    for (double v : r) res_inf = std::max(res_inf, std::abs(v));
    res.restart_residuals.push_back(std::min(best_here, res_inf));
    residual_floor = std::min(residual_floor, std::min(best_here, res_inf));
    if (res_inf <= tol) {
      any_feasible = true;
      const double obj = 0.5 * dot(h, h);
      if (obj < best_obj) {
        best_obj = obj;
        res.h_star = h;
        res.residual = res_inf;
      }
    }
  }

  if (any_feasible) {
    res.status = RateStatus::feasible;
    res.value = best_obj;
  } else {
    res.status = RateStatus::infeasible;
    res.value = std::numeric_limits<double>::infinity();
    res.residual = residual_floor;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Dilation scaling diagnostics.

struct ScalingReport {
  std::vector<double> eps;          // sorted decreasing
  double max_rel_level1 = 0;        // eps^n scaling of level-1 increments
  double max_rel_level2 = 0;        // eps^{2n} scaling of level-2 blocks
  double max_rel_homo = 0;          // eps^{np} scaling of the p-variation power
  std::vector<double> composition_gap;  // mean max |X(eps xi) - eps^n X(xi)| per eps
  bool n_alpha_monotone = true;     // N_alpha nonincreasing as eps decreases
  bool pass = false;
};

// Operational dilation X -> eps^n X applied to sampled values; level-2 blocks
// must scale by eps^{2n} and the p-variation power by eps^{np} exactly
// (bilinearity), checked per sample. The exact Hermite composition xi -> eps*xi
// is reported alongside as the composition gap; it coincides with the dilation
// only at order 1.
inline ScalingReport scaling_check(const KernelPath& k, std::vector<double> eps_list, int samples,
                                   const Rng& rng, double alpha = 0.25, double p = 2.5) {
  if (eps_list.empty()) throw std::invalid_argument("scaling_check: no dilations");
  for (double e : eps_list)
    if (!(e > 0)) throw std::invalid_argument("scaling_check: dilations must be positive");
  if (samples < 1) throw std::invalid_argument("scaling_check: need samples");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
  const EnhancedProcess proc = make_enhanced_process({k});
  const int n = k.order;
  const int last = proc.nodes() - 1;

  ScalingReport rep;
  rep.eps = eps_list;
  rep.composition_gap.assign(eps_list.size(), 0.0);

  for (int s = 0; s < samples; ++s) {
    Rng stream = rng.child(static_cast<std::uint64_t>(s));
    GaussianSample w = sample_gaussian(proc.ambient, stream);
    const EnhancedSample base = enhance(proc, w);
    std::vector<Vec> values(static_cast<std::size_t>(proc.nodes()), Vec(1));
    for (int i = 0; i <= last; ++i)
      values[static_cast<std::size_t>(i)][0] = base.level0[0][static_cast<std::size_t>(i)];
    const Level2Path x = lift_piecewise_linear(proc.grid, values);
    const double homo = interval_cost(x, p, 0, last);
    int prev_n = std::numeric_limits<int>::max();
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
      const double c1 = std::pow(eps_list[e], n);
      auto scaled = values;
      for (auto& v : scaled) v[0] *= c1;
      const Level2Path xs = lift_piecewise_linear(proc.grid, scaled);
      const double d1 = std::abs(xs.increment1(0, last)[0] - c1 * x.increment1(0, last)[0]);
      rep.max_rel_level1 = std::max(rep.max_rel_level1, d1 / (1.0 + c1 * std::abs(x.increment1(0, last)[0])));
      const double b0 = x.level2(0, last).at(0, 0);
      const double d2 = std::abs(xs.level2(0, last).at(0, 0) - c1 * c1 * b0);
      rep.max_rel_level2 = std::max(rep.max_rel_level2, d2 / (1.0 + c1 * c1 * std::abs(b0)));
      const double dh = std::abs(interval_cost(xs, p, 0, last) - std::pow(c1, p) * homo);
      rep.max_rel_homo = std::max(rep.max_rel_homo, dh / (1.0 + std::pow(c1, p) * homo));
      const int n_alpha = greedy(xs, alpha, p).N;
      if (n_alpha > prev_n) rep.n_alpha_monotone = false;
      prev_n = n_alpha;

      GaussianSample ws = w;
      for (auto& xi : ws.xi) xi *= eps_list[e];
      const EnhancedSample comp = enhance(proc, ws);
      double gap = 0;
      for (int i = 0; i <= last; ++i)
        gap = std::max(gap, std::abs(comp.level0[0][static_cast<std::size_t>(i)] -
                                     c1 * base.level0[0][static_cast<std::size_t>(i)]));
      rep.composition_gap[e] += gap / samples;
    }
  }
  rep.pass = rep.max_rel_level1 <= 1e-12 && rep.max_rel_level2 <= 1e-12 &&
             rep.max_rel_homo <= 1e-12 && rep.n_alpha_monotone;
  return rep;
}

}  // namespace chaosrough
