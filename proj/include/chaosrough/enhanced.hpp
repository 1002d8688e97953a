#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chaos.hpp"
#include "kernels.hpp"
#include "roughlift.hpp"
#include "symtensor.hpp"

namespace chaosrough {

// How the Malliavin derivative blocks of one component are evaluated.
// - linear: order-1 chaos, DX_t = f_t is deterministic.
// - product: every factor has order 1, derivatives follow the product rule.
// - generic: symbolic derivative of the materialized node kernels.
enum class DerivStrategy { linear, product, generic };

struct EnhancedProcess {
  std::vector<KernelPath> components;
  std::vector<double> grid;
  int ambient = 0;
  std::vector<DerivStrategy> strategy;
  // Evaluation streams per component: one stream per factor (a single stream
  // for non-product components), each holding the node-0 chaos followed by one
  // increment chaos per grid cell.
  std::vector<std::vector<std::vector<ChaosVariable>>> streams;

  int dimension() const { return static_cast<int>(components.size()); }
  int nodes() const { return static_cast<int>(grid.size()); }
  int order(int comp) const { return components[static_cast<std::size_t>(comp)].order; }
  int max_order() const {
    int n = 0;
    for (const auto& c : components) n = std::max(n, c.order);
    return n;
  }
};

inline EnhancedProcess make_enhanced_process(std::vector<KernelPath> comps) {
  if (comps.empty()) throw std::invalid_argument("make_enhanced_process: no components");
  EnhancedProcess p;
  p.grid = comps.front().grid;
  for (const auto& c : comps) {
    c.validate();
    if (c.grid != p.grid)
      throw std::invalid_argument("make_enhanced_process: components must share one grid");
    p.ambient = std::max(p.ambient, c.dim());
  }
  for (const auto& c : comps)
    if (c.dim() != p.ambient)
      throw std::invalid_argument("make_enhanced_process: components must share the ambient dimension");
  const auto stream_of = [](const KernelPath& k) {
    std::vector<ChaosVariable> stream;
    stream.push_back(ChaosVariable{k.at(0)});
    for (int i = 0; i + 1 < k.nodes(); ++i) stream.push_back(ChaosVariable{k.increment(i, i + 1)});
    return stream;
  };
  for (const auto& c : comps) {
    if (!c.factors.empty()) {
      bool order_one = true;
      for (const auto& f : c.factors) order_one = order_one && f.order == 1;
      if (!order_one && !c.nodes_materialized)
        throw std::invalid_argument(
            "make_enhanced_process: unmaterialized components need order-1 factors");
      p.strategy.push_back(order_one ? DerivStrategy::product : DerivStrategy::generic);
      std::vector<std::vector<ChaosVariable>> streams;
      if (order_one)
        for (const auto& f : c.factors) streams.push_back(stream_of(f));
      else
        streams.push_back(stream_of(c));
      p.streams.push_back(std::move(streams));
    } else {
      p.strategy.push_back(c.order == 1 ? DerivStrategy::linear : DerivStrategy::generic);
      p.streams.push_back({stream_of(c)});
    }
  }
  p.components = std::move(comps);
  return p;
}

struct EnhancedSample {
  GaussianSample w;
  std::vector<Vec> level0;                      // [comp][node]
  std::vector<std::vector<Vec>> factor_values;  // [comp][stream][node]
};

inline EnhancedSample enhance(const EnhancedProcess& p, const GaussianSample& w) {
  if (w.dim() != p.ambient) throw std::invalid_argument("enhance: sample dimension mismatch");
  EnhancedSample s;
  s.w = w;
  const int nodes = p.nodes();
  s.level0.assign(static_cast<std::size_t>(p.dimension()), Vec(nodes, 1.0));
  s.factor_values.resize(static_cast<std::size_t>(p.dimension()));
  for (int c = 0; c < p.dimension(); ++c) {
    for (const auto& stream : p.streams[static_cast<std::size_t>(c)]) {
      Vec vals(nodes);
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        acc += eval_chaos(stream[static_cast<std::size_t>(i)], w);
        vals[static_cast<std::size_t>(i)] = acc;
        s.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] *= acc;
      }
      s.factor_values[static_cast<std::size_t>(c)].push_back(std::move(vals));
    }
  }
  return s;
}

inline EnhancedSample enhance_sample(const EnhancedProcess& p, Rng& rng) {
  return enhance(p, sample_gaussian(p.ambient, rng));
}

// Cameron-Martin shift: the sample coordinates live in the orthonormal cell
// basis, so omega + r h is exactly xi_i + r h_i.
inline GaussianSample translate_gaussian(const GaussianSample& w, const SymTensor& h, double r) {
  if (h.order() != 1 || h.dim() != w.dim())
    throw std::invalid_argument("translate_gaussian: direction must be order 1 in the sample dimension");
  GaussianSample out = w;
  for (const auto& [alpha, c] : h.coeffs()) out.xi[static_cast<std::size_t>(alpha[0])] += r * c;
  return out;
}

inline EnhancedSample translate(const EnhancedProcess& p, const EnhancedSample& s,
                                const SymTensor& h, double r) {
  return enhance(p, translate_gaussian(s.w, h, r));
}

// D^k X_t realized at one node as an order-k tensor over the ambient basis.
// Product rule for order-1 factors:
//   D^k prod_i Y^i_t = k! sum_{|S|=k} (prod_{i not in S} Y^i_t) sym-outer_{i in S} g^i_t.
inline SymTensor derivative_tensor(const EnhancedProcess& p, const EnhancedSample& s,
                                   int comp, int k, int node) {
  if (comp < 0 || comp >= p.dimension())
    throw std::out_of_range("derivative_tensor: component out of range");
  if (node < 0 || node >= p.nodes()) throw std::out_of_range("derivative_tensor: node out of range");
  if (k < 1) throw std::invalid_argument("derivative_tensor: derivative order must be >= 1");
  const auto& c = p.components[static_cast<std::size_t>(comp)];
  if (k > c.order) return SymTensor(k, p.ambient);
  switch (p.strategy[static_cast<std::size_t>(comp)]) {
    case DerivStrategy::linear:
      return c.at(node);
    case DerivStrategy::product: {
      const int m = static_cast<int>(c.factors.size());
      MultiIndex all(static_cast<std::size_t>(m));
      std::iota(all.begin(), all.end(), 0);
      SymTensor out(k, p.ambient);
      for (const auto& sub : sub_multisets(all, k)) {
        SymTensor g = c.factors[static_cast<std::size_t>(sub[0])].at(node);
        for (std::size_t i = 1; i < sub.size(); ++i)
          g = symmetrize_outer(g, c.factors[static_cast<std::size_t>(sub[i])].at(node));
        double coef = factorial(k);
        for (int i : multiset_minus(all, sub))
          coef *= s.factor_values[static_cast<std::size_t>(comp)][static_cast<std::size_t>(i)]
                                 [static_cast<std::size_t>(node)];
        g *= coef;
        out += g;
      }
      out.prune();
      return out;
    }
    case DerivStrategy::generic:
      return malliavin(ChaosVariable{c.at(node)}, k).realize(s.w);
  }
  throw std::logic_error("derivative_tensor: unknown strategy");
}

// <D^k X_t, h^{x k}> at every node. For product and linear components this
// needs only the factor values and the prefix pairings <g^i_t, h>.
inline Vec pairing_path(const EnhancedProcess& p, const EnhancedSample& s,
                        int comp, int k, const SymTensor& h) {
  if (comp < 0 || comp >= p.dimension()) throw std::out_of_range("pairing_path: component out of range");
  if (h.order() != 1 || h.dim() != p.ambient)
    throw std::invalid_argument("pairing_path: direction must be order 1 in the ambient dimension");
  if (k < 0) throw std::invalid_argument("pairing_path: derivative order must be >= 0");
  const int nodes = p.nodes();
  if (k == 0) return s.level0[static_cast<std::size_t>(comp)];
  const auto& c = p.components[static_cast<std::size_t>(comp)];
  if (k > c.order) return Vec(nodes, 0.0);
  Vec out(nodes, 0.0);
  const auto& streams = p.streams[static_cast<std::size_t>(comp)];
  switch (p.strategy[static_cast<std::size_t>(comp)]) {
    case DerivStrategy::linear: {
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        acc += inner(streams[0][static_cast<std::size_t>(i)].kernel, h);
        out[static_cast<std::size_t>(i)] = acc;
      }
      return out;
    }
    case DerivStrategy::product: {
      const int m = static_cast<int>(streams.size());
      std::vector<Vec> a(static_cast<std::size_t>(m), Vec(nodes));
      for (int f = 0; f < m; ++f) {
        double acc = 0.0;
        for (int i = 0; i < nodes; ++i) {
          acc += inner(streams[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)].kernel, h);
          a[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)] = acc;
        }
      }
      MultiIndex all(static_cast<std::size_t>(m));
      std::iota(all.begin(), all.end(), 0);
      const double kf = factorial(k);
      for (const auto& sub : sub_multisets(all, k)) {
        const MultiIndex rest = multiset_minus(all, sub);
        for (int i = 0; i < nodes; ++i) {
          double term = kf;
          for (int f : sub) term *= a[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)];
          for (int f : rest)
            term *= s.factor_values[static_cast<std::size_t>(comp)][static_cast<std::size_t>(f)]
                                   [static_cast<std::size_t>(i)];
          out[static_cast<std::size_t>(i)] += term;
        }
      }
      return out;
    }
    case DerivStrategy::generic: {
      const SymTensor hk = power(h, k);
      for (int i = 0; i < nodes; ++i)
        out[static_cast<std::size_t>(i)] = inner(derivative_tensor(p, s, comp, k, i), hk);
      return out;
    }
  }
  throw std::logic_error("pairing_path: unknown strategy");
}

// Flat layout of the enhanced path (X, DX, ..., D^n X) per component, each
// derivative block in the orthonormal monomial basis of its order.
inline CompLayout enhanced_layout(const EnhancedProcess& p) {
  CompLayout l;
  double total = 0;
  for (int c = 0; c < p.dimension(); ++c)
    for (int k = 0; k <= p.order(c); ++k) {
      const double bd = k == 0 ? 1.0 : binomial(p.ambient + k - 1, k);
      l.comps.push_back({k, static_cast<int>(bd), static_cast<int>(total)});
      total += bd;
      if (total > 20000)
        throw std::length_error("enhanced_layout: flattened width too large for lifting");
    }
  l.total = static_cast<int>(total);
  l.validate();
  return l;
}

// Piecewise-linear rough lift of the flattened enhanced path. Block k of the
// flat vector carries coefficients v_kappa = c_kappa sqrt(kappa!/k!) so that
// Euclidean norms agree with tensor norms.
inline Level2Path lift_enhanced(const EnhancedProcess& p, const EnhancedSample& s) {
  const CompLayout layout = enhanced_layout(p);
  const int nmax = p.max_order();
  std::vector<std::map<MultiIndex, int>> pos(static_cast<std::size_t>(nmax) + 1);
  for (int k = 1; k <= nmax; ++k) {
    int idx = 0;
    for (const auto& kappa : all_multi_indices(k, p.ambient)) pos[static_cast<std::size_t>(k)][kappa] = idx++;
  }
  std::vector<Vec> values(static_cast<std::size_t>(p.nodes()), Vec(layout.total, 0.0));
  std::size_t block = 0;
  for (int c = 0; c < p.dimension(); ++c)
    for (int k = 0; k <= p.order(c); ++k, ++block) {
      const int off = layout.comps[block].offset;
      for (int i = 0; i < p.nodes(); ++i) {
        auto& row = values[static_cast<std::size_t>(i)];
        if (k == 0) {
          row[static_cast<std::size_t>(off)] = s.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
          continue;
        }
        const SymTensor d = derivative_tensor(p, s, c, k, i);
        for (const auto& [kappa, coef] : d.coeffs())
          row[static_cast<std::size_t>(off + pos[static_cast<std::size_t>(k)].at(kappa))] =
              coef * std::sqrt(multiplicity_factorial(kappa) / factorial(k));
      }
    }
  return lift_piecewise_linear(p.grid, values, layout);
}

// Rough lift of the component values alone, without derivative blocks.
inline Level2Path level0_lift(const EnhancedProcess& p, const EnhancedSample& s) {
  std::vector<Vec> values(static_cast<std::size_t>(p.nodes()), Vec(static_cast<std::size_t>(p.dimension())));
  for (int c = 0; c < p.dimension(); ++c)
    for (int i = 0; i < p.nodes(); ++i)
      values[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          s.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
  return lift_piecewise_linear(p.grid, values);
}

// Growth of the lifted norm under Cameron-Martin translation. mean_ratio[i]
// is the sample mean of ||T_{r h} X-hat||^p / ||X-hat||^p in homogeneous
// p-variation; slope is the least-squares slope of log mean_ratio against
// log r. Samples whose untranslated norm vanishes are dropped and counted.
struct TranslationGrowth {
  std::vector<double> r;
  std::vector<double> mean_ratio;
  double slope = 0;
  int degenerate = 0;
};

inline TranslationGrowth translation_growth(const EnhancedProcess& p, const SymTensor& h,
                                            const std::vector<double>& rs, double pvar,
                                            int samples, const Rng& rng) {
  if (rs.size() < 2) throw std::invalid_argument("translation_growth: need at least two magnitudes");
  for (std::size_t i = 0; i < rs.size(); ++i)
    if (rs[i] <= 0 || (i > 0 && rs[i] <= rs[i - 1]))
      throw std::invalid_argument("translation_growth: magnitudes must be positive and increasing");
  if (rs.back() <= 1.0)
    throw std::invalid_argument("translation_growth: need magnitudes above 1");
  if (samples < 1) throw std::invalid_argument("translation_growth: need at least one sample");
  if (std::abs(norm(h) - 1.0) > 1e-8)
    throw std::invalid_argument("translation_growth: direction must have unit norm");
  TranslationGrowth g;
  g.r = rs;
  g.mean_ratio.assign(rs.size(), 0.0);
  int used = 0;
  for (int sample = 0; sample < samples; ++sample) {
    Rng stream = rng.child(static_cast<std::uint64_t>(sample));
    const GaussianSample w = sample_gaussian(p.ambient, stream);
    const PVarResult base = p_variation(lift_enhanced(p, enhance(p, w)), pvar);
    const double base_pow = base.level1_pow + base.level2_pow;
    if (!(base_pow > 0)) {
      ++g.degenerate;
      continue;
    }
    ++used;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const EnhancedSample s = enhance(p, translate_gaussian(w, h, rs[i]));
      const PVarResult pv = p_variation(lift_enhanced(p, s), pvar);
      g.mean_ratio[i] += (pv.level1_pow + pv.level2_pow) / base_pow;
    }
  }
  if (used == 0) throw std::runtime_error("translation_growth: every sample was degenerate");
  for (double& v : g.mean_ratio) v /= used;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double x = std::log(rs[i]);
    const double y = std::log(g.mean_ratio[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  g.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return g;
}

}  // namespace chaosrough
