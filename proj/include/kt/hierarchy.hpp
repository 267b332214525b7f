#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "kt/error.hpp"
#include "kt/treelet.hpp"

namespace kt {

struct Merge {
  std::size_t step = 0;
  std::size_t removed = 0;  // alpha: label that disappears
  std::size_t kept = 0;     // beta: label of the merged cluster
  double score = 0.0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;

  std::size_t n_roots() const { return n_leaves - merges.size(); }

  /// Throws unless the merges form a valid forest over the live labels.
  void validate() const {
    if (merges.size() >= n_leaves && n_leaves > 0)
      throw Error("dendrogram has too many merges");
    std::vector<char> live(n_leaves, 1);
    for (std::size_t k = 0; k < merges.size(); ++k) {
      const auto& m = merges[k];
      if (m.removed >= n_leaves || m.kept >= n_leaves || m.removed == m.kept)
        throw Error("invalid merge at step " + std::to_string(k + 1));
      if (!live[m.removed] || !live[m.kept])
        throw Error("merge at step " + std::to_string(k + 1) + " references a dead label");
      live[m.removed] = 0;
    }
  }

  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

struct ClusterLabels {
  std::vector<std::size_t> assignments;
  std::size_t n_clusters = 0;

  std::size_t size() const { return assignments.size(); }
  friend bool operator==(const ClusterLabels&, const ClusterLabels&) = default;
};

/// Renumbers arbitrary integer labels so ids follow first appearance, which
/// is the same as ordering clusters by their smallest member index.
inline ClusterLabels canonical_labels(const std::vector<std::size_t>& raw) {
  ClusterLabels out;
  out.assignments.resize(raw.size());
  std::unordered_map<std::size_t, std::size_t> ids;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, fresh] = ids.try_emplace(raw[i], out.n_clusters);
    if (fresh) ++out.n_clusters;
    out.assignments[i] = it->second;
  }
  return out;
}

inline Dendrogram merge_tree(const TreeletDecomposition& d) {
  Dendrogram t;
  t.n_leaves = d.p;
  t.merges.reserve(d.records.size());
  for (const auto& r : d.records) t.merges.push_back({r.step, r.alpha, r.beta, r.score});
  return t;
}

namespace detail {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

inline ClusterLabels labels_after(const Dendrogram& tree, std::size_t n_merges) {
  UnionFind uf(tree.n_leaves);
  for (std::size_t k = 0; k < n_merges; ++k) uf.unite(tree.merges[k].removed, tree.merges[k].kept);
  std::vector<std::size_t> roots(tree.n_leaves);
  for (std::size_t i = 0; i < tree.n_leaves; ++i) roots[i] = uf.find(i);
  return canonical_labels(roots);
}

}  // namespace detail

/// Flat clustering after the first (n_leaves - n_clusters) merges. Cluster
/// ids are ordered by smallest member index.
inline ClusterLabels cut(const Dendrogram& tree, std::size_t n_clusters) {
  if (n_clusters > tree.n_leaves)
    throw UsageError("requested " + std::to_string(n_clusters) + " clusters but only " +
                     std::to_string(tree.n_leaves) + " leaves");
  if (n_clusters < tree.n_roots() || n_clusters == 0)
    throw Error("decomposition stopped early; requested cut unreachable (minimum " +
                std::to_string(tree.n_roots()) + " clusters)");
  return detail::labels_after(tree, tree.n_leaves - n_clusters);
}

/// Applies merges in order up to (not including) the first one scoring below
/// `threshold`.
inline ClusterLabels cut_at_score(const Dendrogram& tree, double threshold) {
  std::size_t k = 0;
  while (k < tree.merges.size() && tree.merges[k].score >= threshold) ++k;
  return detail::labels_after(tree, k);
}

}  // namespace kt
