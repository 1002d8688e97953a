#pragma once
// Minimal dense vector/matrix helpers sized for desk-scale experiments. Row
// major, bounds unchecked in release paths; nothing here is performance
// critical beyond cache-friendly loops.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace chaosrough {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vec sub(const Vec& x, const Vec& y) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec out(static_cast<std::size_t>(m.rows), 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = &m.a[static_cast<std::size_t>(i) * m.cols];
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

// Determinant by Gaussian elimination with partial pivoting; meant for the
// small state dimensions of the solvers.
inline double determinant(Mat m) {
  if (m.rows != m.cols) throw std::invalid_argument("determinant: matrix not square");
  const int n = m.rows;
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int pivot = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(m.at(r, c)) > std::abs(m.at(pivot, c))) pivot = r;
    if (m.at(pivot, c) == 0.0) return 0.0;
    if (pivot != c) {
      for (int j = 0; j < n; ++j) std::swap(m.at(pivot, j), m.at(c, j));
      det = -det;
    }
    det *= m.at(c, c);
    for (int r = c + 1; r < n; ++r) {
      const double f = m.at(r, c) / m.at(c, c);
      for (int j = c; j < n; ++j) m.at(r, j) -= f * m.at(c, j);
    }
  }
  return det;
}

// y += a * (u v^T)
inline void outer_accum(double a, const Vec& u, const Vec& v, Mat& y) {
  for (int i = 0; i < y.rows; ++i) {
    const double au = a * u[i];
    if (au == 0.0) continue;
    double* row = &y.a[static_cast<std::size_t>(i) * y.cols];
    for (int j = 0; j < y.cols; ++j) row[j] += au * v[j];
  }
}

inline double frobenius2(const Mat& m) {
  double s = 0.0;
  for (double x : m.a) s += x * x;
  return s;
}

// In-place lower Cholesky of a symmetric positive semidefinite matrix; tiny
// diagonal shifts absorb roundoff on rank-deficient inputs.
inline Mat cholesky(const Mat& c, double jitter = 1e-12) {
  if (c.rows != c.cols) throw std::invalid_argument("cholesky: matrix not square");
  const int n = c.rows;
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = c.at(i, j);
      for (int k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      if (i == j) {
        if (s < -1e-8) throw std::runtime_error("cholesky: matrix not positive semidefinite");
        l.at(i, i) = std::sqrt(std::max(s, 0.0) + jitter);
      } else {
        l.at(i, j) = s / l.at(j, j);
      }
    }
  }
  return l;
}

// Solve A x = b for symmetric positive definite A via Cholesky.
inline Vec solve_spd(const Mat& a, const Vec& b) {
  const Mat l = cholesky(a);
  const int n = l.rows;
  Vec y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l.at(i, k) * y[k];
    y[i] = s / l.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * x[k];
    x[i] = s / l.at(i, i);
  }
  return x;
}

}  // namespace chaosrough
