#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kt/error.hpp"
#include "kt/sym_matrix.hpp"

namespace kt {

/// One treelet step. The rotation acts on (min(alpha, beta), max(alpha, beta))
/// in that order. alpha leaves the scaling set, beta keeps the merged cluster.
struct RotationRecord {
  std::size_t step = 0;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  RotationCoeffs coeffs;
  double diag_alpha = 0.0;
  double diag_beta = 0.0;
  double score = 0.0;

  std::size_t first() const { return std::min(alpha, beta); }
  std::size_t second() const { return std::max(alpha, beta); }
};

struct TreeletDecomposition {
  std::size_t p = 0;
  std::vector<RotationRecord> records;
  std::vector<double> final_diag;
  double lambda = 0.0;

  /// Number of rotations performed (L). Less than p - 1 means an early stop.
  std::size_t stop_level() const { return records.size(); }
  bool complete() const { return p == 0 || records.size() + 1 == p; }
};

struct DecomposeOptions {
  double lambda = 0.0;
  double stop_tol = 1e-10;
  // Full O(p²) rescan per step instead of cached best partners. Slow; kept as
  // the reference for the cached path.
  bool naive_scan = false;
};

struct PairChoice {
  std::size_t first = 0;
  std::size_t second = 0;
  double score = 0.0;
};

/// |A_ij| / sqrt(A_ii A_jj) + lambda |A_ij|. The correlation term is 0 when
/// the diagonal product is at or below 1e-300.
template <typename Matrix>
double similarity(const Matrix& a, std::size_t i, std::size_t j, double lambda) {
  const double aij = std::abs(a(i, j));
  const double d = a(i, i) * a(j, j);
  const double corr = d > 1e-300 ? aij / std::sqrt(d) : 0.0;
  return corr + lambda * aij;
}

/// Highest-similarity unordered pair among `active` (sorted ascending not
/// required). Ties go to the lexicographically smallest (min, max) pair.
template <typename Matrix>
PairChoice select_pair(const Matrix& a, std::span<const std::size_t> active, double lambda) {
  if (active.size() < 2) throw Error("select_pair needs at least two active indices");
  for (std::size_t i : active)
    if (i >= a.size()) throw Error("active index out of range");
  std::vector<std::size_t> idx(active.begin(), active.end());
  std::sort(idx.begin(), idx.end());
  PairChoice best{idx[0], idx[1], -1.0};
  for (std::size_t x = 0; x < idx.size(); ++x)
    for (std::size_t y = x + 1; y < idx.size(); ++y) {
      const double s = similarity(a, idx[x], idx[y], lambda);
      if (s > best.score) best = {idx[x], idx[y], s};
    }
  return best;
}

namespace detail {

// Working copy of the active submatrix for the decomposition loop, row-major
// with both triangles so row reads are contiguous. Entries involving retired
// indices are dropped; the storage is compacted once half of it is dead.
class DenseWork {
public:
  explicit DenseWork(const SymMatrix& a)
      : p_(a.size()), m_(p_), cells_(p_ * p_), ids_(p_), pos_(p_), diag_(p_) {
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) cells_[i * p_ + j] = a(i, j);
      ids_[i] = pos_[i] = i;
      diag_[i] = a(i, i);
    }
    // Upper triangle by tiles to keep the transposed writes cache-local.
    constexpr std::size_t tile = 64;
    for (std::size_t i0 = 0; i0 < p_; i0 += tile)
      for (std::size_t j0 = 0; j0 <= i0; j0 += tile)
        for (std::size_t i = i0; i < std::min(i0 + tile, p_); ++i)
          for (std::size_t j = j0; j < std::min(j0 + tile, i); ++j)
            cells_[j * p_ + i] = cells_[i * p_ + j];
    live_ = ids_;
  }

  std::size_t size() const { return p_; }
  // Defined for active i, j (any i on the diagonal).
  double operator()(std::size_t i, std::size_t j) const {
    return i == j ? diag_[i] : cells_[pos_[i] * m_ + pos_[j]];
  }
  const std::vector<double>& diag() const { return diag_; }

  // similarity(*this, i, j, lambda) with row i read contiguously.
  double score(std::size_t i, std::size_t j, double lambda) const {
    const double aij = std::abs(cells_[pos_[i] * m_ + pos_[j]]);
    const double d = diag_[i] * diag_[j];
    const double corr = d > 1e-300 ? aij / std::sqrt(d) : 0.0;
    return corr + lambda * aij;
  }

  // Same arithmetic as apply_rotation on SymMatrix, restricted to live rows.
  void rotate(std::size_t p, std::size_t q, RotationCoeffs r) {
    const double c = r.c, s = r.s;
    const std::size_t lp = pos_[p], lq = pos_[q];
    double* rp = &cells_[lp * m_];
    double* rq = &cells_[lq * m_];
    const double app = diag_[p], aqq = diag_[q], apq = rp[lq];
    for (std::size_t lk : live_) {
      if (lk == lp || lk == lq) continue;
      const double akp = rp[lk], akq = rq[lk];
      rp[lk] = cells_[lk * m_ + lp] = c * akp - s * akq;
      rq[lk] = cells_[lk * m_ + lq] = s * akp + c * akq;
    }
    diag_[p] = rp[lp] = c * c * app - 2.0 * c * s * apq + s * s * aqq;
    diag_[q] = rq[lq] = s * s * app + 2.0 * c * s * apq + c * c * aqq;
    rp[lq] = rq[lp] = 0.0;
  }

  void retire(std::size_t i) {
    live_.erase(std::lower_bound(live_.begin(), live_.end(), pos_[i]));
    if (m_ >= 64 && 2 * live_.size() <= m_) compact();
  }

private:
  void compact() {
    const std::size_t m = live_.size();
    std::vector<double> cells(m * m);
    std::vector<std::size_t> ids(m);
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t y = 0; y < m; ++y) cells[x * m + y] = cells_[live_[x] * m_ + live_[y]];
      ids[x] = ids_[live_[x]];
    }
    for (std::size_t x = 0; x < m; ++x) {
      pos_[ids[x]] = x;
      live_[x] = x;
    }
    cells_ = std::move(cells);
    ids_ = std::move(ids);
    m_ = m;
  }

  std::size_t p_;
  std::size_t m_;
  std::vector<double> cells_;
  std::vector<std::size_t> ids_;   // storage slot -> index
  std::vector<std::size_t> pos_;   // index -> storage slot
  std::vector<std::size_t> live_;  // live slots, ascending
  std::vector<double> diag_;
};

// Per-index best partner among the active set. Only rows touching the two
// rotated indices can change after a step, so each step refreshes those and
// fully rescans only rows whose cached partner was one of them.
class PartnerCache {
public:
  PartnerCache(const DenseWork& a, double lambda)
      : a_(a), lambda_(lambda), active_(a.size()), partner_(a.size()), score_(a.size()) {
    for (std::size_t i = 0; i < a.size(); ++i) active_[i] = i;
    for (std::size_t i = 0; i < a.size(); ++i) rescan(i);
  }

  std::size_t live_count() const { return active_.size(); }

  PairChoice best() const {
    PairChoice out{0, 0, -1.0};
    bool first = true;
    for (std::size_t i : active_) {
      const std::size_t lo = std::min(i, partner_[i]), hi = std::max(i, partner_[i]);
      if (first || score_[i] > out.score ||
          (score_[i] == out.score && std::pair(lo, hi) < std::pair(out.first, out.second))) {
        out = {lo, hi, score_[i]};
        first = false;
      }
    }
    return out;
  }

  // Called after rows alpha and beta of the matrix changed and alpha retired.
  void update(std::size_t alpha, std::size_t beta) {
    active_.erase(std::find(active_.begin(), active_.end(), alpha));
    if (active_.size() < 2) return;
    rescan(beta);
    for (std::size_t i : active_) {
      if (i == beta) continue;
      if (partner_[i] == alpha || partner_[i] == beta) {
        rescan(i);
        continue;
      }
      const double s = a_.score(beta, i, lambda_);
      if (s > score_[i] || (s == score_[i] && beta < partner_[i])) {
        score_[i] = s;
        partner_[i] = beta;
      }
    }
  }

private:
  void rescan(std::size_t i) {
    double best = -1.0;
    std::size_t who = i;
    for (std::size_t j : active_) {
      if (j == i) continue;
      const double s = a_.score(i, j, lambda_);
      if (s > best) {  // active_ is ascending, so ties keep the smaller j
        best = s;
        who = j;
      }
    }
    score_[i] = best;
    partner_[i] = who;
  }

  const DenseWork& a_;
  double lambda_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> partner_;
  std::vector<double> score_;
};

inline void check_decompose_input(const SymMatrix& a0, const DecomposeOptions& opt) {
  if (a0.size() == 0) throw Error("decompose needs a non-empty matrix");
  if (!(opt.lambda >= 0.0)) throw UsageError("lambda must be non-negative");
  if (!(opt.stop_tol >= 0.0)) throw UsageError("stop tolerance must be non-negative");
  for (std::size_t i = 0; i < a0.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j)
      if (!std::isfinite(a0(i, j))) throw Error("non-finite matrix entry");
    if (a0(i, i) < -1e-10)
      throw Error("negative diagonal entry at index " + std::to_string(i));
  }
}

}  // namespace detail

/// Treelet induction on an SPSD similarity matrix. Each step rotates the
/// most similar active pair, keeps the larger-diagonal index as the scaling
/// (cluster) index and retires the other. Stops early once the best score
/// falls below stop_tol.
inline TreeletDecomposition decompose(const SymMatrix& a0, const DecomposeOptions& opt = {}) {
  detail::check_decompose_input(a0, opt);
  const std::size_t p = a0.size();
  detail::DenseWork a(a0);
  TreeletDecomposition out;
  out.p = p;
  out.lambda = opt.lambda;
  out.records.reserve(p > 0 ? p - 1 : 0);

  std::vector<std::size_t> active(p);
  for (std::size_t i = 0; i < p; ++i) active[i] = i;
  std::optional<detail::PartnerCache> cache;
  if (!opt.naive_scan && p >= 2) cache.emplace(a, opt.lambda);

  for (std::size_t k = 1; k < p; ++k) {
    const PairChoice pick = opt.naive_scan ? select_pair(a, active, opt.lambda) : cache->best();
    if (pick.score < opt.stop_tol) break;

    const std::size_t i = pick.first, j = pick.second;
    const RotationCoeffs r = jacobi_coeffs(a(i, i), a(j, j), a(i, j));
    a.rotate(i, j, r);

    RotationRecord rec;
    rec.step = k;
    rec.coeffs = r;
    rec.score = pick.score;
    if (a(j, j) < a(i, i)) {
      rec.alpha = j;
      rec.beta = i;
    } else if (a(i, i) < a(j, j)) {
      rec.alpha = i;
      rec.beta = j;
    } else {
      rec.alpha = i;  // equal diagonals: retire the smaller index
      rec.beta = j;
    }
    rec.diag_alpha = a(rec.alpha, rec.alpha);
    rec.diag_beta = a(rec.beta, rec.beta);
    out.records.push_back(rec);

    active.erase(std::find(active.begin(), active.end(), rec.alpha));
    a.retire(rec.alpha);
    if (cache) cache->update(rec.alpha, rec.beta);
  }

  out.final_diag = a.diag();
  return out;
}

/// Scaling set S_k: indices not retired by the first k rotations, ascending.
inline std::vector<std::size_t> scaling_set(const TreeletDecomposition& d, std::size_t k) {
  if (k > d.stop_level()) throw Error("level exceeds the decomposition's stop level");
  std::vector<char> live(d.p, 1);
  for (std::size_t s = 0; s < k; ++s) live[d.records[s].alpha] = 0;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.p; ++i)
    if (live[i]) out.push_back(i);
  return out;
}

/// B_k v, applying the first k stored rotations in order.
inline std::vector<double> apply_basis(const TreeletDecomposition& d, std::size_t k,
                                       std::vector<double> v) {
  if (k > d.stop_level()) throw Error("level exceeds the decomposition's stop level");
  if (v.size() != d.p) throw Error("dimension mismatch");
  for (std::size_t s = 0; s < k; ++s) {
    const auto& rec = d.records[s];
    const std::size_t i = rec.first(), j = rec.second();
    const double c = rec.coeffs.c, sn = rec.coeffs.s;
    const double vi = v[i], vj = v[j];
    v[i] = c * vi - sn * vj;
    v[j] = sn * vi + c * vj;
  }
  return v;
}

/// B_k v with detail (non-scaling) coordinates below epsilon in magnitude
/// set to zero. Scaling coordinates are never dropped.
inline std::vector<double> compress(const TreeletDecomposition& d, std::size_t k,
                                    std::vector<double> v, double epsilon) {
  if (!(epsilon >= 0.0)) throw UsageError("epsilon must be non-negative");
  v = apply_basis(d, k, std::move(v));
  std::vector<char> detail(d.p, 0);
  for (std::size_t s = 0; s < k; ++s) detail[d.records[s].alpha] = 1;
  for (std::size_t i = 0; i < d.p; ++i)
    if (detail[i] && std::abs(v[i]) < epsilon) v[i] = 0.0;
  return v;
}

/// A_k recovered by replaying the first k rotations on A_0.
inline SymMatrix rotate_to_level(SymMatrix a0, const TreeletDecomposition& d, std::size_t k) {
  if (k > d.stop_level()) throw Error("level exceeds the decomposition's stop level");
  if (a0.size() != d.p) throw Error("dimension mismatch");
  for (std::size_t s = 0; s < k; ++s)
    apply_rotation(a0, d.records[s].first(), d.records[s].second(), d.records[s].coeffs);
  return a0;
}

}  // namespace kt
