#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enhanced.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "roughlift.hpp"

namespace chaosrough {

// A family of driving vector fields V_a: R^m -> R^m with directional
// derivatives supplied analytically. d2 and d3 may be left empty; solvers that
// need them fail with the missing order named.
struct VectorFieldSet {
  int state_dim = 0;
  int driver_dim = 0;
  std::function<Vec(int, const Vec&)> v;
  std::function<Vec(int, const Vec&, const Vec&)> d1;
  std::function<Vec(int, const Vec&, const Vec&, const Vec&)> d2;
  std::function<Vec(int, const Vec&, const Vec&, const Vec&, const Vec&)> d3;
  std::vector<double> ck_bounds;  // optional sup-norm estimates for V, DV, ...

  void validate() const {
    if (state_dim < 1 || driver_dim < 1)
      throw std::invalid_argument("VectorFieldSet: dimensions must be positive");
    if (!v || !d1) throw std::invalid_argument("VectorFieldSet: value and first derivative required");
  }
};

// V_a(y) = A_a y + b_a. Higher derivatives vanish.
inline VectorFieldSet affine_fields(std::vector<Mat> a, std::vector<Vec> b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("affine_fields: need matching field lists");
  const int m = a.front().rows;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].rows != m || a[i].cols != m || static_cast<int>(b[i].size()) != m)
      throw std::invalid_argument("affine_fields: inconsistent dimensions");
  VectorFieldSet f;
  f.state_dim = m;
  f.driver_dim = static_cast<int>(a.size());
  f.v = [a, b](int i, const Vec& y) {
    Vec r = matvec(a[static_cast<std::size_t>(i)], y);
    axpy(1.0, b[static_cast<std::size_t>(i)], r);
    return r;
  };
  f.d1 = [a](int i, const Vec&, const Vec& z) { return matvec(a[static_cast<std::size_t>(i)], z); };
  f.d2 = [m](int, const Vec&, const Vec&, const Vec&) { return Vec(static_cast<std::size_t>(m), 0.0); };
  f.d3 = [m](int, const Vec&, const Vec&, const Vec&, const Vec&) {
    return Vec(static_cast<std::size_t>(m), 0.0);
  };
  return f;
}

// Scalar dY = Y dX.
inline VectorFieldSet scalar_linear_field() {
  Mat a(1, 1);
  a.at(0, 0) = 1.0;
  return affine_fields({a}, {Vec{0.0}});
}

// Smooth bounded fields V_a(y)_i = s_ai tanh(<w_ai, y> + b_ai) with analytic
// derivatives up to third order.
inline VectorFieldSet tanh_fields(int state_dim, int driver_dim, double scale, std::uint64_t seed) {
  if (state_dim < 1 || driver_dim < 1)
    throw std::invalid_argument("tanh_fields: dimensions must be positive");
  Rng rng(seed);
  std::vector<std::vector<Vec>> w(static_cast<std::size_t>(driver_dim),
                                  std::vector<Vec>(static_cast<std::size_t>(state_dim)));
  std::vector<Vec> bias(static_cast<std::size_t>(driver_dim), Vec(static_cast<std::size_t>(state_dim)));
  std::vector<Vec> amp(static_cast<std::size_t>(driver_dim), Vec(static_cast<std::size_t>(state_dim)));
  for (int a = 0; a < driver_dim; ++a)
    for (int i = 0; i < state_dim; ++i) {
      Vec row(static_cast<std::size_t>(state_dim));
      for (auto& x : row) x = rng.normal();
      w[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = std::move(row);
      bias[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = 0.5 * rng.normal();
      amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = scale * (0.5 + rng.uniform());
    }
  VectorFieldSet f;
  f.state_dim = state_dim;
  f.driver_dim = driver_dim;
  f.v = [w, bias, amp, state_dim](int a, const Vec& y) {
    Vec r(static_cast<std::size_t>(state_dim));
    for (int i = 0; i < state_dim; ++i) {
      const double u = dot(w[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)], y) +
                       bias[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      r[static_cast<std::size_t>(i)] = amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] * std::tanh(u);
    }
    return r;
  };
  f.d1 = [w, bias, amp, state_dim](int a, const Vec& y, const Vec& z) {
    Vec r(static_cast<std::size_t>(state_dim));
    for (int i = 0; i < state_dim; ++i) {
      const auto& wi = w[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      const double t = std::tanh(dot(wi, y) + bias[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)]);
      r[static_cast<std::size_t>(i)] =
          amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] * (1.0 - t * t) * dot(wi, z);
    }
    return r;
  };
  f.d2 = [w, bias, amp, state_dim](int a, const Vec& y, const Vec& z1, const Vec& z2) {
    Vec r(static_cast<std::size_t>(state_dim));
    for (int i = 0; i < state_dim; ++i) {
      const auto& wi = w[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      const double t = std::tanh(dot(wi, y) + bias[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)]);
      r[static_cast<std::size_t>(i)] = amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] *
                                       (-2.0 * t * (1.0 - t * t)) * dot(wi, z1) * dot(wi, z2);
    }
    return r;
  };
  f.d3 = [w, bias, amp, state_dim](int a, const Vec& y, const Vec& z1, const Vec& z2, const Vec& z3) {
    Vec r(static_cast<std::size_t>(state_dim));
    for (int i = 0; i < state_dim; ++i) {
      const auto& wi = w[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
      const double t = std::tanh(dot(wi, y) + bias[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)]);
      const double s2 = 1.0 - t * t;
      r[static_cast<std::size_t>(i)] = amp[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] *
                                       (-2.0 * s2 * (1.0 - 3.0 * t * t)) * dot(wi, z1) * dot(wi, z2) *
                                       dot(wi, z3);
    }
    return r;
  };
  return f;
}

// Max relative error of the supplied derivatives against central finite
// differences at random points and directions.
inline double validate_derivatives(const VectorFieldSet& f, int trials, const Rng& rng) {
  f.validate();
  const double eps = 1e-5;
  double worst = 0.0;
  Rng stream = rng.child(0);
  const auto rand_vec = [&stream](int n) {
    Vec r(static_cast<std::size_t>(n));
    for (auto& x : r) x = stream.normal();
    return r;
  };
  for (int t = 0; t < trials; ++t)
    for (int a = 0; a < f.driver_dim; ++a) {
      const Vec y = rand_vec(f.state_dim);
      const Vec z1 = rand_vec(f.state_dim);
      const Vec z2 = rand_vec(f.state_dim);
      const Vec z3 = rand_vec(f.state_dim);
      const auto check = [&](const Vec& exact, const Vec& plus, const Vec& minus) {
        for (std::size_t i = 0; i < exact.size(); ++i) {
          const double fd = (plus[i] - minus[i]) / (2.0 * eps);
          worst = std::max(worst, std::abs(fd - exact[i]) / (1.0 + std::abs(exact[i])));
        }
      };
      Vec yp = y, ym = y;
      axpy(eps, z1, yp);
      axpy(-eps, z1, ym);
      check(f.d1(a, y, z1), f.v(a, yp), f.v(a, ym));
      if (f.d2) {
        yp = y;
        ym = y;
        axpy(eps, z2, yp);
        axpy(-eps, z2, ym);
        check(f.d2(a, y, z1, z2), f.d1(a, yp, z1), f.d1(a, ym, z1));
      }
      if (f.d3) {
        yp = y;
        ym = y;
        axpy(eps, z3, yp);
        axpy(-eps, z3, ym);
        check(f.d3(a, y, z1, z2, z3), f.d2(a, yp, z1, z2), f.d2(a, ym, z1, z2));
      }
    }
  return worst;
}

struct RdeOptions {
  int substeps = 1;
};

struct RdeSolution {
  std::vector<double> grid;
  std::vector<Vec> y;
  std::vector<Vec> z1;  // <D Y_t, h>, present when deriv_order >= 1
  std::vector<Vec> z2;  // <D^2 Y_t, h x h>, present when deriv_order == 2
};

// Second-order (Davie) solver for dY = sum_a V_a(Y) dX^a driven by a level-2
// lift, together with the first and second Malliavin derivative equations
// paired against a fixed direction h. For deriv_order k the joint driver must
// stack (X, <DX,h>[, <D^2X,h x h>]) so its width is (k+1) x driver_dim; the
// derivative steps are the exact r-derivatives of the discrete flow of the
// translated driver family, so finite differences of the solved path match up
// to the difference quotient's own truncation error.
inline RdeSolution rde_solve(const VectorFieldSet& f, const Vec& y0, const Level2Path& joint,
                             int deriv_order = 0, RdeOptions opt = {}) {
  f.validate();
  joint.validate();
  if (deriv_order < 0 || deriv_order > 2)
    throw std::invalid_argument("rde_solve: derivative order must be 0, 1, or 2");
  const int d = f.driver_dim;
  const int m = f.state_dim;
  if (joint.width() != (deriv_order + 1) * d)
    throw std::invalid_argument("rde_solve: joint driver width must be (k+1) x driver dimension");
  if (static_cast<int>(y0.size()) != m)
    throw std::invalid_argument("rde_solve: initial state dimension mismatch");
  if (deriv_order >= 1 && !f.d2)
    throw std::invalid_argument("rde_solve: derivative order 1 needs the second field derivative");
  if (deriv_order == 2 && !f.d3)
    throw std::invalid_argument("rde_solve: derivative order 2 needs the third field derivative");
  const int S = std::max(1, opt.substeps);
  const int nodes = joint.nodes();

  RdeSolution sol;
  sol.grid = joint.grid;
  Vec y = y0;
  Vec z(static_cast<std::size_t>(m), 0.0), zz(static_cast<std::size_t>(m), 0.0);
  sol.y.push_back(y);
  if (deriv_order >= 1) sol.z1.push_back(z);
  if (deriv_order == 2) sol.z2.push_back(zz);

  Vec dx(static_cast<std::size_t>(joint.width()));
  Mat x2(joint.width(), joint.width());
  std::vector<Vec> va(static_cast<std::size_t>(d)), dva_z(static_cast<std::size_t>(d)),
      dva_zz(static_cast<std::size_t>(d)), d2va_zz(static_cast<std::size_t>(d));
  for (int cell = 0; cell + 1 < nodes; ++cell) {
    joint.increment1_into(cell, cell + 1, dx);
    joint.level2_into(cell, cell + 1, x2);
    if (S > 1) {
      // geodesic substeps: each substep carries dx/S and x2/S - (S-1)/(2S^2) dx x dx,
      // so Chen recomposition over the S substeps reproduces (dx, x2) exactly
      x2 *= 1.0 / S;
      outer_accum(-(S - 1.0) / (2.0 * S * S), dx, dx, x2);
      for (auto& vv : dx) vv /= S;
    }
    for (int sub = 0; sub < S; ++sub) {
      for (int a = 0; a < d; ++a) {
        va[static_cast<std::size_t>(a)] = f.v(a, y);
        if (deriv_order >= 1) dva_z[static_cast<std::size_t>(a)] = f.d1(a, y, z);
        if (deriv_order == 2) {
          dva_zz[static_cast<std::size_t>(a)] = f.d1(a, y, zz);
          d2va_zz[static_cast<std::size_t>(a)] = f.d2(a, y, z, z);
        }
      }
      Vec yi(static_cast<std::size_t>(m), 0.0), zi(static_cast<std::size_t>(m), 0.0),
          zzi(static_cast<std::size_t>(m), 0.0);
      for (int a = 0; a < d; ++a) {
        const double dxa = dx[static_cast<std::size_t>(a)];
        axpy(dxa, va[static_cast<std::size_t>(a)], yi);
        if (deriv_order >= 1) {
          const double dua = dx[static_cast<std::size_t>(d + a)];
          axpy(dxa, dva_z[static_cast<std::size_t>(a)], zi);
          axpy(dua, va[static_cast<std::size_t>(a)], zi);
          if (deriv_order == 2) {
            const double dwa = dx[static_cast<std::size_t>(2 * d + a)];
            axpy(dxa, dva_zz[static_cast<std::size_t>(a)], zzi);
            axpy(dxa, d2va_zz[static_cast<std::size_t>(a)], zzi);
            axpy(2.0 * dua, dva_z[static_cast<std::size_t>(a)], zzi);
            axpy(dwa, va[static_cast<std::size_t>(a)], zzi);
          }
        }
      }
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const double c_x2 = x2.at(a, b);
          const Vec g = f.d1(b, y, va[static_cast<std::size_t>(a)]);
          axpy(c_x2, g, yi);
          if (deriv_order >= 1) {
            const double rx2 = x2.at(d + a, b) + x2.at(a, d + b);
            Vec dg = f.d2(b, y, va[static_cast<std::size_t>(a)], z);
            axpy(1.0, f.d1(b, y, dva_z[static_cast<std::size_t>(a)]), dg);
            axpy(c_x2, dg, zi);
            axpy(rx2, g, zi);
            if (deriv_order == 2) {
              const double rrx2 = 2.0 * x2.at(d + a, d + b) + x2.at(2 * d + a, b) + x2.at(a, 2 * d + b);
              Vec dg_zz = f.d2(b, y, va[static_cast<std::size_t>(a)], zz);
              axpy(1.0, f.d1(b, y, dva_zz[static_cast<std::size_t>(a)]), dg_zz);
              Vec d2g = f.d3(b, y, va[static_cast<std::size_t>(a)], z, z);
              axpy(2.0, f.d2(b, y, dva_z[static_cast<std::size_t>(a)], z), d2g);
              axpy(1.0, f.d1(b, y, d2va_zz[static_cast<std::size_t>(a)]), d2g);
              axpy(c_x2, dg_zz, zzi);
              axpy(c_x2, d2g, zzi);
              axpy(2.0 * rx2, dg, zzi);
              axpy(rrx2, g, zzi);
            }
          }
        }
      axpy(1.0, yi, y);
      if (deriv_order >= 1) axpy(1.0, zi, z);
      if (deriv_order == 2) axpy(1.0, zzi, zz);
    }
    for (double v : y)
      if (!std::isfinite(v))
        throw std::runtime_error("rde_solve: non-finite state at node " + std::to_string(cell + 1));
    sol.y.push_back(y);
    if (deriv_order >= 1) sol.z1.push_back(z);
    if (deriv_order == 2) sol.z2.push_back(zz);
  }
  return sol;
}

struct JacobianSolution {
  std::vector<double> grid;
  std::vector<Vec> y;
  std::vector<Mat> jac;  // J_t = dY_t / dy0
  double min_abs_det = std::numeric_limits<double>::infinity();
  int min_det_node = 0;
  bool det_underflow = false;
};

// Solution together with the Jacobian flow dJ = DV(Y)[J] dX, stepped by the
// same second-order scheme.
inline JacobianSolution rde_jacobian(const VectorFieldSet& f, const Vec& y0, const Level2Path& x,
                                     RdeOptions opt = {}) {
  f.validate();
  x.validate();
  if (!f.d2) throw std::invalid_argument("rde_jacobian: needs the second field derivative");
  const int d = f.driver_dim;
  const int m = f.state_dim;
  if (x.width() != d) throw std::invalid_argument("rde_jacobian: driver width mismatch");
  if (static_cast<int>(y0.size()) != m)
    throw std::invalid_argument("rde_jacobian: initial state dimension mismatch");
  const int S = std::max(1, opt.substeps);

  JacobianSolution sol;
  sol.grid = x.grid;
  Vec y = y0;
  Mat jac(m, m);
  for (int i = 0; i < m; ++i) jac.at(i, i) = 1.0;
  const auto record = [&sol, &y, &jac](int node) {
    sol.y.push_back(y);
    sol.jac.push_back(jac);
    const double det = std::abs(determinant(jac));
    if (det < sol.min_abs_det) {
      sol.min_abs_det = det;
      sol.min_det_node = node;
    }
  };
  record(0);

  Vec dx(static_cast<std::size_t>(d));
  Mat x2(d, d);
  std::vector<Vec> va(static_cast<std::size_t>(d));
  Vec col(static_cast<std::size_t>(m));
  for (int cell = 0; cell + 1 < x.nodes(); ++cell) {
    x.increment1_into(cell, cell + 1, dx);
    x.level2_into(cell, cell + 1, x2);
    if (S > 1) {
      x2 *= 1.0 / S;
      outer_accum(-(S - 1.0) / (2.0 * S * S), dx, dx, x2);
      for (auto& vv : dx) vv /= S;
    }
    for (int sub = 0; sub < S; ++sub) {
      for (int a = 0; a < d; ++a) va[static_cast<std::size_t>(a)] = f.v(a, y);
      Vec yi(static_cast<std::size_t>(m), 0.0);
      Mat ji(m, m);
      for (int c = 0; c < m; ++c) {
        for (int i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = jac.at(i, c);
        Vec zi(static_cast<std::size_t>(m), 0.0);
        for (int a = 0; a < d; ++a) axpy(dx[static_cast<std::size_t>(a)], f.d1(a, y, col), zi);
        for (int a = 0; a < d; ++a) {
          const Vec dva_c = f.d1(a, y, col);
          for (int b = 0; b < d; ++b) {
            Vec dg = f.d2(b, y, va[static_cast<std::size_t>(a)], col);
            axpy(1.0, f.d1(b, y, dva_c), dg);
            axpy(x2.at(a, b), dg, zi);
          }
        }
        for (int i = 0; i < m; ++i) ji.at(i, c) = zi[static_cast<std::size_t>(i)];
      }
      for (int a = 0; a < d; ++a) axpy(dx[static_cast<std::size_t>(a)], va[static_cast<std::size_t>(a)], yi);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          axpy(x2.at(a, b), f.d1(b, y, va[static_cast<std::size_t>(a)]), yi);
      axpy(1.0, yi, y);
      jac += ji;
    }
    for (double v : y)
      if (!std::isfinite(v))
        throw std::runtime_error("rde_jacobian: non-finite state at node " + std::to_string(cell + 1));
    record(cell + 1);
  }
  sol.det_underflow = sol.min_abs_det < 1e-12;
  return sol;
}

// Joint driver (X, <DX,h>[, <D^2X,h x h>]) lifted piecewise-linearly on the
// sample grid. The leading d x d block of its level 2 is the lift of X alone;
// the cross blocks carry the areas that force the derivative equations.
inline Level2Path malliavin_joint_lift(const EnhancedProcess& p, const EnhancedSample& s,
                                       const SymTensor& h, int k) {
  if (k < 1 || k > 2) throw std::invalid_argument("malliavin_joint_lift: derivative order must be 1 or 2");
  const int d = p.dimension();
  const int nodes = p.nodes();
  std::vector<Vec> values(static_cast<std::size_t>(nodes), Vec(static_cast<std::size_t>((k + 1) * d)));
  for (int c = 0; c < d; ++c) {
    const Vec u = pairing_path(p, s, c, 1, h);
    const Vec w = k == 2 ? pairing_path(p, s, c, 2, h) : Vec();
    for (int i = 0; i < nodes; ++i) {
      values[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
          s.level0[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
      values[static_cast<std::size_t>(i)][static_cast<std::size_t>(d + c)] = u[static_cast<std::size_t>(i)];
      if (k == 2)
        values[static_cast<std::size_t>(i)][static_cast<std::size_t>(2 * d + c)] = w[static_cast<std::size_t>(i)];
    }
  }
  return lift_piecewise_linear(p.grid, values);
}

inline RdeSolution malliavin_rde(const VectorFieldSet& f, const Vec& y0, const EnhancedProcess& p,
                                 const EnhancedSample& s, const SymTensor& h, int k,
                                 RdeOptions opt = {}) {
  return rde_solve(f, y0, malliavin_joint_lift(p, s, h, k), k, opt);
}

// All partitions of {0, ..., k-1}, each as a list of blocks.
inline std::vector<std::vector<std::vector<int>>> set_partitions(int k) {
  if (k < 0) throw std::invalid_argument("set_partitions: negative size");
  std::vector<std::vector<std::vector<int>>> parts = {{}};
  for (int e = 0; e < k; ++e) {
    std::vector<std::vector<std::vector<int>>> next;
    for (const auto& part : parts) {
      for (std::size_t b = 0; b < part.size(); ++b) {
        auto grown = part;
        grown[b].push_back(e);
        next.push_back(std::move(grown));
      }
      auto fresh = part;
      fresh.push_back({e});
      next.push_back(std::move(fresh));
    }
    parts = std::move(next);
  }
  return parts;
}

// One term of the k-th derivative equation: coeff x D^{vf_order} V applied to
// Y-derivative factors of the listed orders, integrated against the x_deriv-th
// derivative path of X. x_deriv = 0 is the rough driver itself; the leading
// term (the one containing D^k Y) is listed first.
struct DerivativeTerm {
  int vf_order = 0;
  std::vector<int> y_orders;
  int x_deriv = 0;
  double coeff = 1;
};

inline std::vector<DerivativeTerm> derivative_equation_terms(int k, int n) {
  if (k < 1) throw std::invalid_argument("derivative_equation_terms: derivative order must be >= 1");
  if (n < 1) throw std::invalid_argument("derivative_equation_terms: chaos order must be >= 1");
  const auto sizes_of = [](const std::vector<std::vector<int>>& part) {
    std::vector<int> sizes;
    sizes.reserve(part.size());
    for (const auto& block : part) sizes.push_back(static_cast<int>(block.size()));
    std::sort(sizes.begin(), sizes.end());
    return sizes;
  };
  std::vector<DerivativeTerm> terms;
  terms.push_back({1, {k}, 0, 1.0});
  for (const auto& part : set_partitions(k))
    if (part.size() != 1) terms.push_back({static_cast<int>(part.size()), sizes_of(part), 0, 1.0});
  for (int r = 1; r <= std::min(k, n); ++r)
    for (const auto& part : set_partitions(k - r))
      terms.push_back({static_cast<int>(part.size()), sizes_of(part), r, binomial(k, r)});
  return terms;
}

// Empirical moment profile of a sampled scalar quantity: moments E[q^p] with
// standard errors, plus a sample-doubling stability diagnostic. stable[i] is 1
// when the first-half estimate agrees with the full estimate within 50%
// relative; largest_stable points at the largest such p.
struct MomentScan {
  std::vector<double> p;
  std::vector<double> moment;
  std::vector<double> se;
  std::vector<double> half_moment;
  std::vector<int> stable;
  int largest_stable = -1;
};

inline MomentScan moment_scan(const std::function<double(Rng&)>& quantity,
                              const std::vector<double>& p_list, int samples, const Rng& rng) {
  if (!quantity) throw std::invalid_argument("moment_scan: quantity required");
  if (p_list.empty()) throw std::invalid_argument("moment_scan: no exponents");
  if (samples < 1000) throw std::invalid_argument("moment_scan: need at least 1000 samples");
  std::vector<double> q(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Rng stream = rng.child(static_cast<std::uint64_t>(i));
    q[static_cast<std::size_t>(i)] = quantity(stream);
  }
  MomentScan scan;
  scan.p = p_list;
  for (double p : p_list) {
    double mean = 0, mean2 = 0, half = 0;
    const int half_n = samples / 2;
    for (int i = 0; i < samples; ++i) {
      const double v = std::pow(std::abs(q[static_cast<std::size_t>(i)]), p);
      mean += v / samples;
      mean2 += v * v / samples;
      if (i < half_n) half += v / half_n;
    }
    scan.moment.push_back(mean);
    scan.se.push_back(std::sqrt(std::max(mean2 - mean * mean, 0.0) / samples));
    scan.half_moment.push_back(half);
    const bool ok = std::isfinite(mean) && std::isfinite(half) &&
                    std::abs(mean - half) <= 0.5 * std::abs(mean) + 1e-300;
    scan.stable.push_back(ok ? 1 : 0);
  }
  for (std::size_t i = 0; i < scan.stable.size(); ++i)
    if (scan.stable[i]) scan.largest_stable = static_cast<int>(i);
  return scan;
}

}  // namespace chaosrough
