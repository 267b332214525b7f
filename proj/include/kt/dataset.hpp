#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kt/error.hpp"

namespace kt {

/// One observation: attribute values plus an observed-mask of equal length.
struct RowView {
  std::span<const double> values;
  std::span<const std::uint8_t> present;
};

/// n×p numeric table with a per-cell presence mask. Missing cells hold 0.
class Dataset {
public:
  Dataset() = default;
  Dataset(std::size_t n, std::size_t p)
      : n_(n), p_(p), values_(n * p, 0.0), present_(n * p, 1) {}

  /// Fully-present dataset from row-major values.
  static Dataset from_rows(const std::vector<std::vector<double>>& rows) {
    Dataset d(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d.p_) throw Error("ragged rows");
      for (std::size_t j = 0; j < d.p_; ++j) d.set(i, j, rows[i][j]);
    }
    return d;
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }

  double value(std::size_t i, std::size_t j) const { return values_[i * p_ + j]; }
  bool present(std::size_t i, std::size_t j) const {
    return present_[i * p_ + j] != 0;
  }

  void set(std::size_t i, std::size_t j, double v) {
    values_[i * p_ + j] = v;
    present_[i * p_ + j] = 1;
  }
  void set_missing(std::size_t i, std::size_t j) {
    values_[i * p_ + j] = 0.0;
    present_[i * p_ + j] = 0;
  }

  RowView row(std::size_t i) const {
    return {std::span<const double>(values_).subspan(i * p_, p_),
            std::span<const std::uint8_t>(present_).subspan(i * p_, p_)};
  }

  bool complete() const {
    return std::all_of(present_.begin(), present_.end(),
                       [](std::uint8_t b) { return b != 0; });
  }

  std::vector<std::string>& column_names() { return names_; }
  const std::vector<std::string>& column_names() const { return names_; }

  /// Checks finiteness of present cells and that no row is entirely missing.
  void validate() const {
    for (std::size_t i = 0; i < n_; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < p_; ++j) {
        if (!present(i, j)) continue;
        any = true;
        if (!std::isfinite(value(i, j)))
          throw Error("non-finite value at row " + std::to_string(i + 1) +
                      " column " + std::to_string(j + 1));
      }
      if (!any && p_ > 0)
        throw Error("row " + std::to_string(i + 1) + " has no observed attributes");
    }
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  std::vector<std::string> names_;
};

/// Undirected simple graph in compressed adjacency form.
class Graph {
public:
  Graph() = default;

  /// Collapses duplicate and reversed edges. Self-loops are rejected.
  static Graph from_edges(std::size_t n_vertices,
                          std::vector<std::pair<std::size_t, std::size_t>> edges) {
    for (auto& [u, v] : edges) {
      if (u == v) throw Error("self-loop on vertex " + std::to_string(u));
      if (u >= n_vertices || v >= n_vertices)
        throw Error("edge endpoint out of range");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.n_edges_ = edges.size();
    g.offsets_.assign(n_vertices + 1, 0);
    for (auto [u, v] : edges) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n_vertices; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.neighbors_.resize(2 * edges.size());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      g.neighbors_[fill[u]++] = v;
      g.neighbors_[fill[v]++] = u;
    }
    for (std::size_t i = 0; i < n_vertices; ++i)
      std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
    return g;
  }

  std::size_t vertices() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edges() const { return n_edges_; }

  std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }

  std::size_t max_degree() const {
    std::size_t best = 0;
    for (std::size_t v = 0; v < vertices(); ++v) best = std::max(best, degree(v));
    return best;
  }

  std::span<const std::size_t> neighbors(std::size_t v) const {
    return std::span<const std::size_t>(neighbors_).subspan(offsets_[v], degree(v));
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Original vertex ids when the graph was read with id remapping.
  std::vector<std::uint64_t>& original_ids() { return original_ids_; }
  const std::vector<std::uint64_t>& original_ids() const { return original_ids_; }

  friend bool operator==(const Graph&, const Graph&) = default;

private:
  std::size_t n_edges_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> neighbors_;
  std::vector<std::uint64_t> original_ids_;
};

}  // namespace kt
