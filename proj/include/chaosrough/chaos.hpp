#pragma once
// Polynomial chaos variables: X = I_n(f) for a symmetric order-n kernel f over
// the truncated basis. On symmetrized monomials the integral evaluates to a
// product of probabilists' Hermite polynomials of the independent standard
// normal coordinates; everything else follows by linearity.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "chaosrough/rng.hpp"
#include "chaosrough/symtensor.hpp"

namespace chaosrough {

// Probabilists' Hermite polynomial H_k via the three-term recurrence
// H_{k+1}(x) = x H_k(x) - k H_{k-1}(x), H_0 = 1, H_1 = x.
inline double hermite(int k, double x) {
  if (k < 0) throw std::invalid_argument("hermite: negative degree");
  double prev = 1.0;  // H_0
  if (k == 0) return prev;
  double cur = x;  // H_1
  for (int i = 1; i < k; ++i) {
    const double next = x * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Coordinates of the underlying Gaussian: xi_i = W(e_i), i.i.d. N(0,1).
struct GaussianSample {
  std::vector<double> xi;
  int dim() const { return static_cast<int>(xi.size()); }
};

inline GaussianSample sample_gaussian(int dim, Rng& rng) {
  GaussianSample w;
  w.xi.resize(dim);
  for (auto& x : w.xi) x = rng.normal();
  return w;
}

struct ChaosVariable {
  SymTensor kernel;  // X = I_n(kernel) with n = kernel.order()
  int order() const { return kernel.order(); }
};

// I_n(e-hat_alpha) = prod over distinct values j of H_{mult_j}(xi_j),
// extended linearly. Order 0 is the deterministic constant.
inline double eval_chaos(const ChaosVariable& v, const GaussianSample& w) {
  if (w.dim() < v.kernel.dim())
    throw std::invalid_argument("eval_chaos: sample has fewer coordinates than the kernel");
  double sum = 0.0;
  for (const auto& [alpha, c] : v.kernel.coeffs()) {
    double term = c;
    for (const auto& [j, m] : multiplicities(alpha)) term *= hermite(m, w.xi[j]);
    sum += term;
  }
  return sum;
}

// Product formula: I_n(f) I_m(g) = sum_{r=0}^{min(n,m)} r! C(n,r) C(m,r)
// I_{n+m-2r}(f (x-hat)_r g). Returns one summand per r (possibly zero).
inline std::vector<ChaosVariable> product_expand(const ChaosVariable& a, const ChaosVariable& b) {
  const int n = a.order(), m = b.order();
  std::vector<ChaosVariable> out;
  out.reserve(std::min(n, m) + 1);
  for (int r = 0; r <= std::min(n, m); ++r) {
    const double coeff = factorial(r) * binomial(n, r) * binomial(m, r);
    SymTensor k = contract(a.kernel, b.kernel, r);
    k *= coeff;
    out.push_back(ChaosVariable{std::move(k)});
  }
  return out;
}

// k-th Malliavin derivative of I_n(f), stored componentwise: against the
// monomial e_{i_1} x ... x e_{i_k} the component is
//   (n!/(n-k)!) I_{n-k}( <f, e_{i_1} x ... x e_{i_k}> ),
// which depends only on the multiset kappa of the i's. Realizations assemble
// the symmetric order-k tensor with e-hat coefficients (k!/kappa!) times the
// evaluated component.
struct MalliavinDerivative {
  int k = 0;
  int dim = 1;
  std::map<MultiIndex, ChaosVariable> comps;

  const ChaosVariable* component(const MultiIndex& kappa) const {
    auto it = comps.find(kappa);
    return it == comps.end() ? nullptr : &it->second;
  }

  SymTensor realize(const GaussianSample& w) const {
    SymTensor out(k, dim);
    const double k_fact = factorial(k);
    for (const auto& [kappa, comp] : comps) {
      const double value = eval_chaos(comp, w);
      if (value != 0.0) out.add(kappa, value * k_fact / multiplicity_factorial(kappa));
    }
    out.prune();
    return out;
  }
};

inline MalliavinDerivative malliavin(const ChaosVariable& v, int k,
                                     bool zero_outside_range = false) {
  const int n = v.order();
  if (k < 0 || (k > n && !zero_outside_range))
    throw std::invalid_argument("malliavin: derivative order exceeds chaos order");
  MalliavinDerivative d;
  d.k = k;
  d.dim = v.kernel.dim();
  if (k > n) return d;  // identically zero
  const double scale = factorial(n) / factorial(n - k);
  for (const auto& [alpha, c] : v.kernel.coeffs()) {
    for (const auto& kappa : sub_multisets(alpha, k)) {
      SymTensor paired = contract(SymTensor::basis(d.dim, alpha), SymTensor::basis(d.dim, kappa), k);
      paired *= scale * c;
      auto it = d.comps.find(kappa);
      if (it == d.comps.end())
        d.comps.emplace(kappa, ChaosVariable{std::move(paired)});
      else
        it->second.kernel += paired;
    }
  }
  for (auto& [kappa, comp] : d.comps) comp.kernel.prune();
  return d;
}

// Chaos decomposition of <D^k I_n(f), D^k I_n(g)> over H^{(x)k}:
//   (n!/(n-k)!)^2 sum_{r=0}^{n-k} r! C(n-k,r)^2 I_{2(n-k-r)}(f (x-hat)_{r+k} g).
// The top term r = n-k is the deterministic part (n!)^2/(n-k)! <f,g>.
inline std::vector<ChaosVariable> inner_dk(const SymTensor& f, const SymTensor& g, int k) {
  f.require_same_shape(g, "inner_dk");
  const int n = f.order();
  if (k < 0 || k > n) throw std::invalid_argument("inner_dk: k out of range");
  const double pref = std::pow(factorial(n) / factorial(n - k), 2);
  std::vector<ChaosVariable> out;
  out.reserve(n - k + 1);
  for (int r = 0; r <= n - k; ++r) {
    const double coeff = pref * factorial(r) * binomial(n - k, r) * binomial(n - k, r);
    SymTensor ker = contract(f, g, r + k);
    ker *= coeff;
    out.push_back(ChaosVariable{std::move(ker)});
  }
  return out;
}

// E[(sum_m I_m(h_m))^2] for an expansion with pairwise distinct orders:
// cross terms vanish and each summand contributes m! ||h_m||^2 (the order-0
// constant contributes its square).
inline double expansion_second_moment(const std::vector<ChaosVariable>& terms) {
  for (std::size_t a = 0; a < terms.size(); ++a)
    for (std::size_t b = a + 1; b < terms.size(); ++b)
      if (terms[a].order() == terms[b].order())
        throw std::invalid_argument("expansion_second_moment: orders must be distinct");
  double s = 0.0;
  for (const auto& t : terms) {
    const double n2 = inner(t.kernel, t.kernel);
    s += factorial(t.order()) * n2;
  }
  return s;
}

// E[I_n(f)^4], exactly, via the product formula and the isometry.
inline double fourth_moment(const ChaosVariable& v) {
  return expansion_second_moment(product_expand(v, v));
}

struct MomentRatio {
  double norm_p = 0.0;
  double norm_q = 0.0;
  double ratio = 0.0;  // empirical ||X||_q / ||X||_p
  double bound = 0.0;  // ((q-1)/(p-1))^{n/2}
};

// Empirical L^p/L^q norm ratio against the hypercontractive bound.
inline MomentRatio moment_ratio(const ChaosVariable& v, double p, double q, int samples,
                                std::uint64_t seed) {
  if (!(1.0 < p && p <= q)) throw std::invalid_argument("moment_ratio: need 1 < p <= q");
  if (samples < 10000) throw std::invalid_argument("moment_ratio: need at least 10^4 samples");
  const Rng base(seed);
  double sum_p = 0.0, sum_q = 0.0;
  for (int i = 0; i < samples; ++i) {
    Rng r = base.child(i);
    const GaussianSample w = sample_gaussian(v.kernel.dim(), r);
    const double x = std::abs(eval_chaos(v, w));
    sum_p += std::pow(x, p);
    sum_q += std::pow(x, q);
  }
  MomentRatio out;
  out.norm_p = std::pow(sum_p / samples, 1.0 / p);
  out.norm_q = std::pow(sum_q / samples, 1.0 / q);
  if (!std::isfinite(out.norm_p) || !std::isfinite(out.norm_q) || out.norm_p == 0.0)
    throw std::runtime_error("moment_ratio: degenerate or non-finite sample moments");
  out.ratio = out.norm_q / out.norm_p;
  out.bound = std::pow((q - 1.0) / (p - 1.0), 0.5 * v.order());
  return out;
}

}  // namespace chaosrough
