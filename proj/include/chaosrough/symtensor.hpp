#pragma once
// Symmetric tensors over a finite orthonormal basis e_0..e_{dim-1} of the
// ambient Hilbert space.
//
// Basis convention: a tensor of order n is stored as a sparse combination of
// un-normalized symmetrized monomials
//     e-hat_alpha = symmetrization of e_{a_1} x ... x e_{a_n},
// keyed by the sorted multi-index alpha = (a_1 <= ... <= a_n). These are
// orthogonal with <e-hat_alpha, e-hat_alpha> = alpha!/n!, where alpha! is the
// product of multiplicity factorials. All inner products below are the full
// tensor-space (Hilbert-Schmidt) inner products, not renormalized ones.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaosrough/multiindex.hpp"

namespace chaosrough {

class SymTensor {
 public:
  SymTensor() : order_(0), dim_(1) {}
  SymTensor(int order, int dim) : order_(order), dim_(dim) {
    if (order < 0 || dim <= 0) throw std::invalid_argument("SymTensor: bad order or dim");
  }

  static SymTensor scalar(int dim, double value) {
    SymTensor t(0, dim);
    if (value != 0.0) t.coeffs_[MultiIndex{}] = value;
    return t;
  }

  // e-hat_idx with coefficient 1; idx entries must lie in [0, dim).
  static SymTensor basis(int dim, MultiIndex idx) {
    std::sort(idx.begin(), idx.end());
    SymTensor t(static_cast<int>(idx.size()), dim);
    t.check_index(idx);
    t.coeffs_[std::move(idx)] = 1.0;
    return t;
  }

  // Order-1 tensor with the given coefficients.
  static SymTensor vector(const std::vector<double>& v) {
    SymTensor t(1, static_cast<int>(v.size()));
    for (int i = 0; i < static_cast<int>(v.size()); ++i)
      if (v[i] != 0.0) t.coeffs_[MultiIndex{i}] = v[i];
    return t;
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  const std::map<MultiIndex, double>& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  double coeff(const MultiIndex& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  void set(MultiIndex idx, double value) {
    std::sort(idx.begin(), idx.end());
    if (static_cast<int>(idx.size()) != order_)
      throw std::invalid_argument("SymTensor::set: index order mismatch");
    check_index(idx);
    if (value == 0.0)
      coeffs_.erase(idx);
    else
      coeffs_[std::move(idx)] = value;
  }

  void add(MultiIndex idx, double value) {
    std::sort(idx.begin(), idx.end());
    if (static_cast<int>(idx.size()) != order_)
      throw std::invalid_argument("SymTensor::add: index order mismatch");
    check_index(idx);
    coeffs_[std::move(idx)] += value;
  }

  SymTensor& operator*=(double s) {
    if (s == 0.0) {
      coeffs_.clear();
    } else {
      for (auto& [idx, c] : coeffs_) c *= s;
    }
    return *this;
  }

  SymTensor& operator+=(const SymTensor& other) {
    require_same_shape(other, "operator+=");
    for (const auto& [idx, c] : other.coeffs_) coeffs_[idx] += c;
    return *this;
  }

  SymTensor& operator-=(const SymTensor& other) {
    require_same_shape(other, "operator-=");
    for (const auto& [idx, c] : other.coeffs_) coeffs_[idx] -= c;
    return *this;
  }

  friend SymTensor operator*(double s, SymTensor t) {
    t *= s;
    return t;
  }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) {
    a += b;
    return a;
  }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) {
    a -= b;
    return a;
  }

  // Drop entries with |c| <= eps (exact zeros by default).
  void prune(double eps = 0.0) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (std::abs(it->second) <= eps)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  void require_same_shape(const SymTensor& other, const char* where) const {
    if (order_ != other.order_ || dim_ != other.dim_)
      throw std::invalid_argument(std::string("SymTensor::") + where + ": shape mismatch");
  }

 private:
  void check_index(const MultiIndex& idx) const {
    for (int v : idx)
      if (v < 0 || v >= dim_) throw std::invalid_argument("SymTensor: basis index out of range");
  }

  int order_;
  int dim_;
  std::map<MultiIndex, double> coeffs_;
};

// Symmetrized outer product. On symmetrized monomials this merges the
// multi-indices: e-hat_alpha (x-hat) e-hat_beta = e-hat_{alpha u beta}.
inline SymTensor symmetrize_outer(const SymTensor& a, const SymTensor& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("symmetrize_outer: dim mismatch");
  SymTensor out(a.order() + b.order(), a.dim());
  for (const auto& [alpha, ca] : a.coeffs())
    for (const auto& [beta, cb] : b.coeffs()) out.add(merge_sorted(alpha, beta), ca * cb);
  out.prune();
  return out;
}

// Full tensor-space inner product; orders must agree.
inline double inner(const SymTensor& a, const SymTensor& b) {
  a.require_same_shape(b, "inner");
  const double n_fact = factorial(a.order());
  double sum = 0.0;
  // Walk the smaller map.
  const SymTensor& small = a.coeffs().size() <= b.coeffs().size() ? a : b;
  const SymTensor& large = a.coeffs().size() <= b.coeffs().size() ? b : a;
  for (const auto& [idx, c] : small.coeffs()) {
    const double d = large.coeff(idx);
    if (d != 0.0) sum += c * d * multiplicity_factorial(idx) / n_fact;
  }
  return sum;
}

inline double norm(const SymTensor& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

// Symmetric contraction a (x-hat)_r b: pair r slots of a with r slots of b in
// the tensor-space inner product, then symmetrize the remaining
// (order(a)-r)+(order(b)-r) slots. On monomials,
//   e-hat_alpha (x-hat)_r e-hat_beta =
//     ((n-r)!(m-r)!/(n! m!)) * sum over r-sub-multisets gamma of both indices
//     of (r!/gamma!) P(alpha,gamma) P(beta,gamma) e-hat_{(alpha-gamma)u(beta-gamma)}
// where P(alpha,gamma) is the product over values v of the falling factorial
// mult_alpha(v)(mult_alpha(v)-1)...(mult_alpha(v)-mult_gamma(v)+1). The count
// comes from matching ordered r-tuples of slots of alpha against beta.
// r = 0 reduces to symmetrize_outer; r = n = m reduces to inner().
inline SymTensor contract(const SymTensor& a, const SymTensor& b, int r) {
  if (a.dim() != b.dim()) throw std::invalid_argument("contract: dim mismatch");
  const int n = a.order(), m = b.order();
  if (r < 0 || r > std::min(n, m))
    throw std::invalid_argument("contract: r exceeds min(order(a), order(b))");
  const double scale = factorial(n - r) * factorial(m - r) / (factorial(n) * factorial(m));
  SymTensor out(n + m - 2 * r, a.dim());
  for (const auto& [alpha, ca] : a.coeffs()) {
    const auto gammas = sub_multisets(alpha, r);
    for (const auto& [beta, cb] : b.coeffs()) {
      for (const auto& gamma : gammas) {
        double p_ab = factorial(r) / multiplicity_factorial(gamma);
        bool contained = true;
        for (const auto& [v, mg] : multiplicities(gamma)) {
          const int mb = multiplicity_of(beta, v);
          if (mb < mg) {
            contained = false;
            break;
          }
          p_ab *= falling_factorial(multiplicity_of(alpha, v), mg) * falling_factorial(mb, mg);
        }
        if (!contained) continue;
        out.add(merge_sorted(multiset_minus(alpha, gamma), multiset_minus(beta, gamma)),
                scale * p_ab * ca * cb);
      }
    }
  }
  out.prune();
  return out;
}

// k-fold symmetrized power of an order-1 tensor; k = 0 gives the scalar 1.
inline SymTensor power(const SymTensor& h, int k) {
  if (h.order() != 1) throw std::invalid_argument("power: argument must have order 1");
  if (k < 0) throw std::invalid_argument("power: negative exponent");
  SymTensor out = SymTensor::scalar(h.dim(), 1.0);
  for (int i = 0; i < k; ++i) out = symmetrize_outer(out, h);
  return out;
}

}  // namespace chaosrough
