#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/hierarchy.hpp"
#include "kt/parallel.hpp"
#include "kt/rng.hpp"

namespace kt {

struct MatchingMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  double tpr() const { return tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn); }
  double fpr() const { return fp + tn == 0 ? 0.0 : double(fp) / double(fp + tn); }

  friend bool operator==(const MatchingMatrix&, const MatchingMatrix&) = default;
};

/// Ground-truth pairwise relation: a pair is positive when both items share
/// a class, or (graph form) when the two vertices are adjacent.
class PairReference {
public:
  static PairReference from_classes(std::vector<std::size_t> classes) {
    PairReference r;
    r.kind_ = std::move(classes);
    return r;
  }
  static PairReference from_graph(Graph g) {
    PairReference r;
    r.kind_ = std::move(g);
    return r;
  }

  bool is_graph() const { return std::holds_alternative<Graph>(kind_); }
  const Graph& graph() const { return std::get<Graph>(kind_); }
  const std::vector<std::size_t>& classes() const {
    return std::get<std::vector<std::size_t>>(kind_);
  }

  std::size_t size() const {
    return is_graph() ? graph().vertices() : classes().size();
  }

  bool positive(std::size_t i, std::size_t j) const {
    return is_graph() ? graph().has_edge(i, j) : classes()[i] == classes()[j];
  }

  std::uint64_t total_pairs() const {
    const std::uint64_t n = size();
    return n * (n - (n > 0 ? 1 : 0)) / 2;
  }

  std::uint64_t total_positive() const {
    if (is_graph()) return graph().edges();
    std::unordered_map<std::size_t, std::uint64_t> counts;
    for (std::size_t c : classes()) ++counts[c];
    std::uint64_t p = 0;
    for (auto [c, k] : counts) p += k * (k - 1) / 2;
    return p;
  }

  /// Reference over `items` only; item m of the result is items[m].
  PairReference restrict(std::span<const std::size_t> items) const {
    if (!is_graph()) {
      std::vector<std::size_t> c(items.size());
      for (std::size_t m = 0; m < items.size(); ++m) c[m] = classes().at(items[m]);
      return from_classes(std::move(c));
    }
    std::vector<std::size_t> pos(graph().vertices(), static_cast<std::size_t>(-1));
    for (std::size_t m = 0; m < items.size(); ++m) pos.at(items[m]) = m;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t m = 0; m < items.size(); ++m)
      for (std::size_t v : graph().neighbors(items[m]))
        if (pos[v] != static_cast<std::size_t>(-1) && pos[v] > m) edges.emplace_back(m, pos[v]);
    return from_graph(Graph::from_edges(items.size(), std::move(edges)));
  }

private:
  std::variant<std::vector<std::size_t>, Graph> kind_;
};

namespace detail {

inline std::uint64_t pairs_of(std::uint64_t k) { return k * (k - (k > 0 ? 1 : 0)) / 2; }

inline std::uint64_t co_clustered_pairs(const ClusterLabels& pred) {
  std::vector<std::uint64_t> sizes(pred.n_clusters, 0);
  for (std::size_t l : pred.assignments) ++sizes.at(l);
  std::uint64_t c = 0;
  for (auto s : sizes) c += pairs_of(s);
  return c;
}

}  // namespace detail

/// Pairwise confusion counts of `pred` against `reference`, computed from
/// cluster/class contingency counts (classes) or by scanning edges (graph).
inline MatchingMatrix matching_matrix(const ClusterLabels& pred, const PairReference& ref) {
  if (pred.size() != ref.size()) throw Error("prediction and reference sizes differ");
  const std::uint64_t co = detail::co_clustered_pairs(pred);
  std::uint64_t tp = 0;
  if (ref.is_graph()) {
    const Graph& g = ref.graph();
    for (std::size_t u = 0; u < g.vertices(); ++u)
      for (std::size_t v : g.neighbors(u))
        if (v > u && pred.assignments[u] == pred.assignments[v]) ++tp;
  } else {
    std::unordered_map<std::uint64_t, std::uint64_t> joint;
    for (std::size_t i = 0; i < pred.size(); ++i)
      ++joint[(static_cast<std::uint64_t>(pred.assignments[i]) << 32) ^ ref.classes()[i]];
    for (auto [key, k] : joint) tp += detail::pairs_of(k);
  }
  MatchingMatrix m;
  const std::uint64_t positives = ref.total_positive();
  m.tp = tp;
  m.fn = positives - tp;
  m.fp = co - tp;
  m.tn = ref.total_pairs() - positives - m.fp;
  return m;
}

/// Rand-style agreement: fraction of unordered pairs on which both labelings
/// agree about co-membership. 1.0 when fewer than two items.
inline double pairwise_agreement(const ClusterLabels& a, const ClusterLabels& b) {
  if (a.size() != b.size()) throw Error("labelings differ in size");
  const std::uint64_t total = detail::pairs_of(a.size());
  if (total == 0) return 1.0;
  std::unordered_map<std::uint64_t, std::uint64_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i)
    ++joint[(static_cast<std::uint64_t>(a.assignments[i]) << 32) ^ b.assignments[i]];
  std::uint64_t both = 0;
  for (auto [key, k] : joint) both += detail::pairs_of(k);
  const std::uint64_t ta = detail::co_clustered_pairs(a), tb = detail::co_clustered_pairs(b);
  const std::uint64_t agree = both + (total - ta - tb + both);
  return double(agree) / double(total);
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend auto operator<=>(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

namespace detail {

inline RocCurve finish_curve(std::vector<RocPoint> pts) {
  pts.push_back({0.0, 0.0});
  pts.push_back({1.0, 1.0});
  std::sort(pts.begin(), pts.end());
  return {std::move(pts)};
}

inline RocPoint point_of(std::uint64_t tp, std::uint64_t co, std::uint64_t positives,
                         std::uint64_t negatives) {
  const std::uint64_t fp = co - tp;
  return {negatives == 0 ? 0.0 : double(fp) / double(negatives),
          positives == 0 ? 0.0 : double(tp) / double(positives)};
}

}  // namespace detail

/// One (FPR, TPR) point for every cut of the tree, from all singletons to
/// n_roots clusters, plus the (0,0) and (1,1) anchors. Counts are updated
/// per merge: joining clusters of sizes a and b adds a·b co-clustered pairs,
/// of which the positives come from merged class histograms (classes) or
/// from the smaller side's adjacency (graph).
inline RocCurve roc_from_hierarchy(const Dendrogram& tree, const PairReference& ref) {
  if (ref.size() != tree.n_leaves) throw Error("reference does not cover the tree's leaves");
  tree.validate();
  const std::size_t n = tree.n_leaves;
  const std::uint64_t positives = ref.total_positive();
  const std::uint64_t negatives = ref.total_pairs() - positives;

  detail::UnionFind uf(n);
  std::vector<std::vector<std::size_t>> members(n);
  std::vector<std::unordered_map<std::size_t, std::uint64_t>> hist;
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  if (!ref.is_graph()) {
    hist.resize(n);
    for (std::size_t i = 0; i < n; ++i) hist[i][ref.classes()[i]] = 1;
  }

  std::vector<RocPoint> pts;
  pts.reserve(tree.merges.size() + 3);
  std::uint64_t tp = 0, co = 0;
  pts.push_back(detail::point_of(tp, co, positives, negatives));
  for (const Merge& m : tree.merges) {
    std::size_t big = uf.find(m.kept), small = uf.find(m.removed);
    if (members[big].size() < members[small].size()) std::swap(big, small);
    co += std::uint64_t(members[big].size()) * members[small].size();
    if (ref.is_graph()) {
      for (std::size_t u : members[small])
        for (std::size_t v : ref.graph().neighbors(u))
          if (uf.find(v) == big) ++tp;
    } else {
      if (hist[big].size() < hist[small].size()) std::swap(hist[big], hist[small]);
      for (auto [c, k] : hist[small]) {
        auto it = hist[big].find(c);
        if (it == hist[big].end()) {
          hist[big].emplace(c, k);
        } else {
          tp += it->second * k;
          it->second += k;
        }
      }
      hist[small].clear();
    }
    members[big].insert(members[big].end(), members[small].begin(), members[small].end());
    members[small].clear();
    members[small].shrink_to_fit();
    uf.parent[small] = big;
    pts.push_back(detail::point_of(tp, co, positives, negatives));
  }
  return detail::finish_curve(std::move(pts));
}

/// ROC from a set of flat clusterings (e.g. k-means at several k), plus anchors.
inline RocCurve roc_from_partitions(std::span<const ClusterLabels> partitions,
                                    const PairReference& ref) {
  std::vector<RocPoint> pts;
  for (const auto& p : partitions) {
    const auto m = matching_matrix(p, ref);
    pts.push_back({m.fpr(), m.tpr()});
  }
  return detail::finish_curve(std::move(pts));
}

/// Trapezoidal area under the curve over fpr in [0, 1]. Points are sorted
/// by (fpr, tpr) first.
inline double auc(const RocCurve& curve) {
  auto pts = curve.points;
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  return area;
}

struct KMeansResult {
  ClusterLabels labels;
  std::vector<std::vector<double>> centroids;
  std::vector<double> objective;  // after each assignment step
  std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist(RowView x, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double d = x.values[j] - c[j];
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeding. Centroid sums are accumulated
/// sequentially in item order, so results do not depend on `threads`.
inline KMeansResult kmeans(const Dataset& data, std::size_t k, std::uint64_t seed,
                           std::size_t max_iters = 300, unsigned threads = 1) {
  if (!data.complete()) throw Error("kmeans requires complete data");
  const std::size_t n = data.rows(), p = data.cols();
  if (k == 0 || k > n) throw UsageError("k must lie in [1, n]");
  Rng rng(seed);

  std::vector<std::vector<double>> centers;
  auto row_vec = [&](std::size_t i) {
    auto r = data.row(i).values;
    return std::vector<double>(r.begin(), r.end());
  };
  centers.push_back(row_vec(static_cast<std::size_t>(rng.below(n))));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = detail::sq_dist(data.row(i), centers[0]);
  while (centers.size() < k) {
    double sum = 0.0;
    for (double v : d2) sum += v;
    std::size_t pick = n - 1;
    if (sum > 0.0) {
      const double target = rng.uniform() * sum;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
    centers.push_back(row_vec(pick));
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], detail::sq_dist(data.row(i), centers.back()));
  }

  KMeansResult r;
  std::vector<std::size_t> assign(n, 0), prev;
  std::vector<double> dist(n);
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
    parallel_for(n, threads, [&](std::size_t i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t who = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::sq_dist(data.row(i), centers[c]);
        if (d < best) {
          best = d;
          who = c;
        }
      }
      assign[i] = who;
      dist[i] = best;
    });
    double obj = 0.0;
    for (double d : dist) obj += d;
    r.objective.push_back(obj);
    r.iterations = it + 1;
    if (assign == prev) break;
    prev = assign;

    std::vector<std::vector<double>> sums(k, std::vector<double>(p, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t j = 0; j < p; ++j) sums[assign[i]][j] += data.value(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move it onto the point farthest from its centroid.
        const std::size_t far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        centers[c] = row_vec(far);
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < p; ++j) centers[c][j] = sums[c][j] / double(counts[c]);
    }
  }
  r.labels = canonical_labels(assign);
  r.centroids = std::move(centers);
  return r;
}

/// Per-column z-scores over present entries, population standard deviation.
/// Columns with zero variance (or fewer than two present values) become
/// all-zero; their indices are appended to `flat_columns` when given.
inline Dataset zscore_normalize(const Dataset& data,
                                std::vector<std::size_t>* flat_columns = nullptr) {
  Dataset out = data;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.present(i, j)) {
        sum += data.value(i, j);
        ++m;
      }
    const double mean = m ? sum / double(m) : 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.present(i, j)) ss += (data.value(i, j) - mean) * (data.value(i, j) - mean);
    const double sd = m ? std::sqrt(ss / double(m)) : 0.0;
    const bool flat = m < 2 || !(sd > 0.0);
    if (flat && flat_columns) flat_columns->push_back(j);
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.present(i, j)) out.set(i, j, flat ? 0.0 : (data.value(i, j) - mean) / sd);
  }
  return out;
}

/// Replaces missing cells with their column mean over present entries.
inline Dataset mean_impute(const Dataset& data) {
  Dataset out = data;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.present(i, j)) {
        sum += data.value(i, j);
        ++m;
      }
    const double mean = m ? sum / double(m) : 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (!data.present(i, j)) out.set(i, j, mean);
  }
  return out;
}

}  // namespace kt
