#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/hierarchy.hpp"
#include "kt/kernels.hpp"
#include "kt/parallel.hpp"
#include "kt/rng.hpp"
#include "kt/treelet.hpp"

namespace kt {

/// n_s distinct indices drawn uniformly without replacement: the first n_s
/// steps of a Fisher-Yates shuffle of 0..n-1 driven by Rng(seed).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t n_s,
                                               std::uint64_t seed) {
  if (n_s > n)
    throw UsageError("sample size " + std::to_string(n_s) + " exceeds " + std::to_string(n) +
                     " items");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_s; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n_s);
  return idx;
}

/// Feature-space distance sqrt(K(x,x) + K(y,y) - 2K(x,y)), clamped at 0.
inline double kernel_distance(double kxx, double kyy, double kxy) {
  return std::sqrt(std::max(0.0, kxx + kyy - 2.0 * kxy));
}

inline double kernel_distance(const KernelSpec& spec, RowView x, RowView y) {
  return kernel_distance(eval_kernel(spec, x, x), eval_kernel(spec, y, y),
                         eval_kernel(spec, x, y));
}

template <typename Kernel>
double kernel_distance(const Kernel& kernel, std::size_t x, std::size_t y) {
  return kernel_distance(kernel(x, x), kernel(y, y), kernel(x, y));
}

/// Majority vote among the knn_k nearest sample items under the kernel
/// distance. Distance ties go to the earlier sample position; vote ties to
/// the smallest label.
struct KnnExtender {
  std::size_t knn_k = 5;

  template <typename Kernel>
  std::vector<std::size_t> operator()(const Kernel& kernel, std::span<const std::size_t> sample,
                                      std::span<const std::size_t> sample_labels,
                                      std::span<const std::size_t> queries,
                                      unsigned threads = 1) const {
    if (sample.empty()) throw Error("knn extension needs a non-empty sample");
    if (sample.size() != sample_labels.size()) throw Error("sample/label size mismatch");
    if (knn_k == 0 || knn_k > sample.size())
      throw UsageError("knn k must be in [1, sample size]");
    std::size_t n_labels = 0;
    for (std::size_t l : sample_labels) n_labels = std::max(n_labels, l + 1);

    std::vector<double> self(sample.size());
    for (std::size_t s = 0; s < sample.size(); ++s) self[s] = kernel(sample[s], sample[s]);

    std::vector<std::size_t> out(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t q) {
      const std::size_t x = queries[q];
      const double kxx = kernel(x, x);
      std::vector<std::pair<double, std::size_t>> dist(sample.size());
      for (std::size_t s = 0; s < sample.size(); ++s)
        dist[s] = {kernel_distance(kxx, self[s], kernel(x, sample[s])), s};
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(knn_k),
                        dist.end());
      std::vector<std::size_t> votes(n_labels, 0);
      for (std::size_t m = 0; m < knn_k; ++m) ++votes[sample_labels[dist[m].second]];
      out[q] = static_cast<std::size_t>(
          std::max_element(votes.begin(), votes.end()) - votes.begin());
    });
    return out;
  }
};

struct KtConfig {
  KernelSpec kernel = RbfKernel{1.0};
  std::size_t sample_size = 0;  // 0: the full dataset
  std::size_t n_clusters = 2;
  double lambda = 0.0;
  std::size_t knn_k = 5;
  std::uint64_t seed = 0;
  double stop_tol = 1e-10;
  unsigned threads = 1;
};

struct StageTimings {
  double sample_ms = 0.0;
  double gram_ms = 0.0;
  double decompose_ms = 0.0;
  double cut_ms = 0.0;
  double extend_ms = 0.0;
};

struct FitResult {
  ClusterLabels labels;               // one per input item
  Dendrogram tree;                    // leaf i is item sample[i]
  std::vector<std::size_t> sample;    // ascending item ids
  TreeletDecomposition decomposition;
  StageTimings timings;
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

inline void validate_config(const KtConfig& c, std::size_t n) {
  validate(c.kernel);
  const std::size_t n_s = c.sample_size == 0 ? n : c.sample_size;
  if (n_s < 2 || n_s > n)
    throw UsageError("sample size must lie in [2, " + std::to_string(n) + "]");
  if (c.n_clusters == 0 || c.n_clusters > n_s)
    throw UsageError("cluster count must lie in [1, sample size]");
  if (c.knn_k == 0 || c.knn_k % 2 == 0) throw UsageError("knn k must be odd and positive");
  if (n_s < n && c.knn_k > n_s) throw UsageError("knn k exceeds the sample size");
  if (!(c.lambda >= 0.0)) throw UsageError("lambda must be non-negative");
  if (!(c.stop_tol >= 0.0)) throw UsageError("stop tolerance must be non-negative");
}

}  // namespace detail

/// Sample, build the Gram matrix, decompose, cut, then label out-of-sample
/// items with `extender`. Deterministic given config.seed.
template <typename Kernel, typename Extender = KnnExtender>
FitResult fit_predict_kernel(const Kernel& kernel, const KtConfig& config,
                             const Extender& extender) {
  const std::size_t n = kernel.size();
  detail::validate_config(config, n);
  const std::size_t n_s = config.sample_size == 0 ? n : config.sample_size;
  FitResult r;

  auto t = std::chrono::steady_clock::now();
  r.sample = sample_indices(n, n_s, config.seed);
  std::sort(r.sample.begin(), r.sample.end());
  r.timings.sample_ms = detail::elapsed_ms(t);

  t = std::chrono::steady_clock::now();
  SymMatrix a0 = gram(kernel, r.sample, config.threads);
  r.timings.gram_ms = detail::elapsed_ms(t);

  t = std::chrono::steady_clock::now();
  r.decomposition = decompose(a0, {config.lambda, config.stop_tol, false});
  r.timings.decompose_ms = detail::elapsed_ms(t);

  t = std::chrono::steady_clock::now();
  r.tree = merge_tree(r.decomposition);
  const ClusterLabels sample_labels = cut(r.tree, config.n_clusters);
  r.timings.cut_ms = detail::elapsed_ms(t);

  std::vector<std::size_t> raw(n, 0);
  for (std::size_t s = 0; s < n_s; ++s) raw[r.sample[s]] = sample_labels.assignments[s];
  if (n_s < n) {
    t = std::chrono::steady_clock::now();
    std::vector<std::size_t> queries;
    queries.reserve(n - n_s);
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (s < n_s && r.sample[s] == i) {
        ++s;
        continue;
      }
      queries.push_back(i);
    }
    const auto ext = extender(kernel, r.sample, sample_labels.assignments, queries,
                              config.threads);
    for (std::size_t q = 0; q < queries.size(); ++q) raw[queries[q]] = ext[q];
    r.timings.extend_ms = detail::elapsed_ms(t);
  }
  r.labels = canonical_labels(raw);
  return r;
}

inline FitResult fit_predict(const Dataset& data, const KtConfig& config) {
  data.validate();
  return fit_predict_kernel(DatasetKernel(config.kernel, data), config,
                            KnnExtender{config.knn_k});
}

inline FitResult fit_predict(const Graph& graph, const KtConfig& config) {
  return fit_predict_kernel(GraphAdjacencyKernel(config.kernel, graph), config,
                            KnnExtender{config.knn_k});
}

}  // namespace kt
