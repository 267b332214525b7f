#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "kt/error.hpp"

namespace kt {

/// Dense symmetric matrix with packed lower-triangle storage. Entry (i, j)
/// and (j, i) share one cell, so symmetry is structural.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t p, double fill = 0.0)
      : p_(p), cells_(p * (p + 1) / 2, fill) {}

  /// Builds from full rows; rejects input that is not exactly symmetric.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    SymMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw Error("matrix rows must be square");
      for (std::size_t j = 0; j <= i; ++j) {
        if (rows[i][j] != rows[j][i]) throw Error("matrix is not symmetric");
        m(i, j) = rows[i][j];
      }
    }
    return m;
  }
  static SymMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> r;
    for (auto row : rows) r.emplace_back(row);
    return from_rows(r);
  }
  static SymMatrix identity(std::size_t p) {
    SymMatrix m(p);
    for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return p_; }

  double& operator()(std::size_t i, std::size_t j) { return cells_[index(i, j)]; }
  double operator()(std::size_t i, std::size_t j) const {
    return cells_[index(i, j)];
  }

  double at(std::size_t i, std::size_t j) const {
    check(i, j);
    return (*this)(i, j);
  }
  double& at(std::size_t i, std::size_t j) {
    check(i, j);
    return (*this)(i, j);
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < p_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius() const {
    double s = 0.0;
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < p_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  /// Maximum absolute row sum.
  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < p_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < p_; ++j) row += std::abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  /// Row-major dense copy.
  std::vector<double> to_dense() const {
    std::vector<double> d(p_ * p_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < p_; ++j) d[i * p_ + j] = (*this)(i, j);
    return d;
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
  static std::size_t index(std::size_t i, std::size_t j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }
  void check(std::size_t i, std::size_t j) const {
    if (i >= p_ || j >= p_) throw Error("matrix index out of range");
  }

  std::size_t p_ = 0;
  std::vector<double> cells_;
};

struct RotationCoeffs {
  double c = 1.0;
  double s = 0.0;
};

/// Coefficients of the Jacobi rotation J (J_pp = J_qq = c, J_pq = -J_qp = s)
/// for which (JᵀAJ)_pq = 0. The tangent is the smaller-magnitude root of
/// t² - 2bt - 1 = 0 with b = (a_pp - a_qq) / (2 a_pq) and sgn(0) = +1, which
/// keeps |t| ≤ 1 and c ≥ 1/√2.
inline RotationCoeffs jacobi_coeffs(double a_pp, double a_qq, double a_pq) {
  if (!std::isfinite(a_pp) || !std::isfinite(a_qq) || !std::isfinite(a_pq))
    throw Error("non-finite matrix entry");
  if (a_pq == 0.0) return {1.0, 0.0};
  const double b = (a_pp - a_qq) / (2.0 * a_pq);
  const double sign = b >= 0.0 ? 1.0 : -1.0;
  // For |b| beyond ~1e150 the squared term overflows; t -> -1/(2b) there.
  const double t = std::abs(b) > 1e150
                       ? -0.5 / b
                       : -sign / (std::abs(b) + std::sqrt(b * b + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  return {c, c * t};
}

/// In-place A <- JᵀAJ. Touches only rows/columns p and q, O(size) work.
/// The annihilated entry (p, q) is stored as an exact zero.
inline void apply_rotation(SymMatrix& a, std::size_t p, std::size_t q,
                           RotationCoeffs r) {
  const std::size_t n = a.size();
  if (p >= n || q >= n) throw Error("rotation index out of range");
  if (p == q) throw Error("rotation indices must differ");
  const double c = r.c, s = r.s;
  const double app = a(p, p), aqq = a(q, q), apq = a(p, q);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  a(p, p) = c * c * app - 2.0 * c * s * apq + s * s * aqq;
  a(q, q) = s * s * app + 2.0 * c * s * apq + c * c * aqq;
  a(p, q) = 0.0;
}

/// Copying form of apply_rotation.
inline SymMatrix rotated(SymMatrix a, std::size_t p, std::size_t q,
                         RotationCoeffs r) {
  apply_rotation(a, p, q, r);
  return a;
}

struct SymEigen {
  std::vector<double> values;
  std::vector<double> vectors;  // row-major p×p, column j pairs with values[j]
};

/// Cyclic Jacobi eigenvalue iteration built on apply_rotation. Sweeps until
/// every off-diagonal entry is below 1e-12·‖A‖∞.
inline SymEigen jacobi_eigen(SymMatrix a, int max_sweeps = 100) {
  const std::size_t n = a.size();
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  const double limit = 1e-12 * a.norm_inf();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off <= limit) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= limit) continue;
        const auto r = jacobi_coeffs(a(p, p), a(q, q), a(p, q));
        apply_rotation(a, p, q, r);
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = r.c * vkp - r.s * vkq;
          v[k * n + q] = r.s * vkp + r.c * vkq;
        }
      }
    }
  }
  SymEigen e;
  e.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) e.values[i] = a(i, i);
  e.vectors = std::move(v);
  return e;
}

/// Symmetric PSD square root. Full eigendecomposition, so O(p³): this is
/// a verification oracle, not part of the clustering pipeline.
inline SymMatrix psd_sqrt(const SymMatrix& k, double tol) {
  const std::size_t n = k.size();
  auto e = jacobi_eigen(k);
  for (double& lambda : e.values) {
    if (lambda < -tol)
      throw Error("kernel matrix not PSD (eigenvalue " + std::to_string(lambda) +
                  ")");
    lambda = lambda < 0.0 ? 0.0 : std::sqrt(lambda);
  }
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m)
        acc += e.vectors[i * n + m] * e.values[m] * e.vectors[j * n + m];
      s(i, j) = acc;
    }
  }
  return s;
}

/// Dense A·A.
inline SymMatrix square(const SymMatrix& a) {
  const std::size_t n = a.size();
  SymMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) acc += a(i, m) * a(m, j);
      r(i, j) = acc;
    }
  return r;
}

}  // namespace kt
