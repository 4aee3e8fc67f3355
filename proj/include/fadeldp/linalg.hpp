#ifndef FADELDP_LINALG_HPP
#define FADELDP_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "fadeldp/errors.hpp"

namespace fadeldp {

using Vec = std::vector<double>;

// Dense row-major matrix, sized for state/noise dimensions (d, m <= ~16).
struct Mat {
  int rows = 0, cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return m;
  }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline void axpy(double a, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double frobenius_norm(const Mat& m) { return norm2(m.a); }

// Singular values via one-sided Jacobi, adequate for the tiny matrices used here.
inline std::vector<double> singular_values(const Mat& m0) {
  // Work on the transpose if needed so rows >= cols.
  Mat m = m0;
  if (m.rows < m.cols) {
    Mat t(m0.cols, m0.rows);
    for (int i = 0; i < m0.rows; ++i)
      for (int j = 0; j < m0.cols; ++j) t(j, i) = m0(i, j);
    m = t;
  }
  const int n = m.cols;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (int i = 0; i < m.rows; ++i) {
          alpha += m(i, p) * m(i, p);
          beta += m(i, q) * m(i, q);
          gamma += m(i, p) * m(i, q);
        }
        off += gamma * gamma;
        if (std::abs(gamma) < 1e-300) continue;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < m.rows; ++i) {
          double mp = m(i, p), mq = m(i, q);
          m(i, p) = c * mp - s * mq;
          m(i, q) = s * mp + c * mq;
        }
      }
    }
    if (off < 1e-30) break;
  }
  std::vector<double> sv(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.rows; ++i) s += m(i, j) * m(i, j);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

inline double spectral_norm(const Mat& m) {
  if (m.rows == 0 || m.cols == 0) return 0.0;
  return singular_values(m)[0];
}

inline double min_singular_value(const Mat& m) {
  auto sv = singular_values(m);
  return sv.back();
}

// Smallest eigenvalue of the symmetric part of A, by Jacobi rotations.
inline double sym_min_eigenvalue(const Mat& a0) {
  const int n = a0.rows;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (a0(i, j) + a0(j, i));
  for (int sweep = 0; sweep < 80; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double lo = a(0, 0);
  for (int i = 1; i < n; ++i) lo = std::min(lo, a(i, i));
  return lo;
}

// Solve m x = b by Gaussian elimination with partial pivoting; reports the
// smallest pivot encountered so callers can enforce a singularity floor.
inline Vec lu_solve(const Mat& m0, const Vec& b0, double* min_pivot = nullptr) {
  const int n = m0.rows;
  if (m0.cols != n || static_cast<int>(b0.size()) != n)
    fail(ErrorKind::invalid, "lu_solve: shape mismatch");
  Mat m = m0;
  Vec b = b0;
  double piv_min = INFINITY;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(b[k], b[p]);
    }
    piv_min = std::min(piv_min, std::abs(m(k, k)));
    if (m(k, k) == 0.0) fail(ErrorKind::invalid, "lu_solve: singular matrix");
    for (int i = k + 1; i < n; ++i) {
      double f = m(i, k) / m(k, k);
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  if (min_pivot) *min_pivot = piv_min;
  return x;
}

}  // namespace fadeldp

#endif
