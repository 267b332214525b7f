#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "kt/eval.hpp"
#include "oracles.hpp"

namespace kt {
namespace {

TEST(MatchingMatrix, ThreeItems) {
  const auto ref = PairReference::from_classes({0, 0, 1});
  const auto m = matching_matrix(canonical_labels({1, 1, 2}), ref);
  EXPECT_EQ(m, (MatchingMatrix{1, 0, 2, 0}));
  EXPECT_EQ(m.tpr(), 1.0);
  EXPECT_EQ(m.fpr(), 0.0);
}

TEST(MatchingMatrix, ExtremePartitions) {
  const auto ref = PairReference::from_classes({0, 1, 0, 2, 1});
  const auto one = matching_matrix(canonical_labels({0, 0, 0, 0, 0}), ref);
  EXPECT_EQ(one.fn, 0u);
  EXPECT_EQ(one.tn, 0u);
  EXPECT_EQ(one.tpr(), 1.0);
  EXPECT_EQ(one.fpr(), 1.0);
  const auto singles = matching_matrix(canonical_labels({0, 1, 2, 3, 4}), ref);
  EXPECT_EQ(singles.tp, 0u);
  EXPECT_EQ(singles.fp, 0u);
  EXPECT_EQ(singles.tpr(), 0.0);
  EXPECT_EQ(singles.fpr(), 0.0);
  EXPECT_THROW(matching_matrix(canonical_labels({0, 0}), ref), Error);
}

TEST(MatchingMatrix, AgreesWithPairEnumeration) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + gen() % 40;
    std::vector<std::size_t> pred(n), cls(n);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = gen() % 5;
      cls[i] = gen() % 4;
      for (std::size_t j = i + 1; j < n; ++j)
        if (gen() % 5 == 0) edges.emplace_back(i, j);
    }
    const auto labels = canonical_labels(pred);
    for (const auto& ref : {PairReference::from_classes(cls),
                            PairReference::from_graph(Graph::from_edges(n, edges))}) {
      const auto m = matching_matrix(labels, ref);
      EXPECT_EQ(m, test::brute_matching(labels.assignments, ref));
      EXPECT_EQ(m.total(), n * (n - 1) / 2);
    }
  }
}

TEST(Auc, HandFixtures) {
  EXPECT_NEAR(auc({{{0, 0}, {1, 1}}}), 0.5, 1e-12);
  EXPECT_NEAR(auc({{{0, 0}, {0, 1}, {1, 1}}}), 1.0, 1e-12);
  EXPECT_NEAR(auc({{{0, 0}, {0.2, 0.8}, {1, 1}}}), 0.8, 1e-12);
}

TEST(Auc, SingleInteriorPointTrapezoid) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    const double f = u(gen), r = u(gen);
    const double want = f * r / 2 + (1 - f) * (r + 1) / 2;
    EXPECT_NEAR(auc({{{1, 1}, {f, r}, {0, 0}}}), want, 1e-12);
  }
}

TEST(RocFromHierarchy, ThreeLeaves) {
  const Dendrogram t{3, {{1, 1, 0, 1.0}, {2, 2, 0, 0.5}}};
  const auto curve = roc_from_hierarchy(t, PairReference::from_classes({0, 0, 1}));
  std::set<RocPoint> pts(curve.points.begin(), curve.points.end());
  EXPECT_EQ(pts, (std::set<RocPoint>{{0, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(auc(curve), 1.0);
}

TEST(RocFromHierarchy, PerfectHierarchyHasUnitArea) {
  // Classes {0,1,2} and {3,4}; merges complete each class before joining.
  const Dendrogram t{5, {{1, 1, 0, 1}, {2, 2, 0, 1}, {3, 4, 3, 1}, {4, 3, 0, 1}}};
  const auto curve = roc_from_hierarchy(t, PairReference::from_classes({0, 0, 0, 1, 1}));
  EXPECT_NE(std::find(curve.points.begin(), curve.points.end(), RocPoint{0, 1}),
            curve.points.end());
  EXPECT_EQ(auc(curve), 1.0);
}

TEST(RocFromHierarchy, IncrementalEqualsPerCutRecount) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + gen() % 49;
    const auto tree = test::random_tree(n, n - 1 - (gen() % 3 == 0 ? 1 : 0), gen);
    std::vector<std::size_t> cls(n);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      cls[i] = gen() % 3;
      for (std::size_t j = i + 1; j < n; ++j)
        if (gen() % 4 == 0) edges.emplace_back(i, j);
    }
    for (const auto& ref : {PairReference::from_classes(cls),
                            PairReference::from_graph(Graph::from_edges(n, edges))}) {
      const auto curve = roc_from_hierarchy(tree, ref);
      std::vector<RocPoint> want{{0, 0}, {1, 1}};
      for (std::size_t m = 0; m <= tree.merges.size(); ++m) {
        const auto mm = test::brute_matching(test::brute_cut(tree, m), ref);
        want.push_back({mm.fpr(), mm.tpr()});
      }
      std::sort(want.begin(), want.end());
      ASSERT_EQ(curve.points.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(curve.points[i], want[i]);
    }
  }
}

TEST(RocFromPartitions, AnchorsAndPoints) {
  const auto ref = PairReference::from_classes({0, 0, 1, 1});
  const std::vector<ClusterLabels> parts{canonical_labels({0, 0, 1, 1})};
  const auto c = roc_from_partitions(parts, ref);
  EXPECT_EQ(c.points.size(), 3u);
  EXPECT_EQ(auc(c), 1.0);
}

TEST(PairReference, RestrictGraph) {
  const auto ref = PairReference::from_graph(Graph::from_edges(4, {{0, 1}, {1, 3}, {2, 3}}));
  const std::vector<std::size_t> items{1, 3};
  const auto sub = ref.restrict(items);
  EXPECT_EQ(sub.size(), 2u);
  EXPECT_TRUE(sub.positive(0, 1));
  EXPECT_EQ(sub.total_positive(), 1u);
}

TEST(PairwiseAgreement, RenamingInvariant) {
  EXPECT_EQ(pairwise_agreement(canonical_labels({0, 0, 1}), canonical_labels({5, 5, 2})), 1.0);
  EXPECT_NEAR(pairwise_agreement(canonical_labels({0, 0, 1}), canonical_labels({0, 1, 1})),
              1.0 / 3.0, 1e-15);
}

Dataset blobs3(std::vector<std::size_t>& truth) {
  Rng rng(4);
  Dataset d(90, 2);
  truth.clear();
  const double cx[3] = {0, 20, 0}, cy[3] = {0, 0, 20};
  for (std::size_t i = 0; i < 90; ++i) {
    const std::size_t c = i / 30;
    const auto [zx, zy] = rng.normal_pair();
    d.set(i, 0, cx[c] + zx);
    d.set(i, 1, cy[c] + zy);
    truth.push_back(c);
  }
  return d;
}

TEST(KMeans, Fixtures) {
  const auto d = Dataset::from_rows({{1, 2}, {3, 6}, {5, 1}});
  const auto one = kmeans(d, 1, 0);
  EXPECT_EQ(one.labels.n_clusters, 1u);
  EXPECT_NEAR(one.centroids[0][0], 3.0, 1e-15);
  EXPECT_NEAR(one.centroids[0][1], 3.0, 1e-15);

  const auto two = kmeans(Dataset::from_rows({{0, 0}, {1, 1}}), 2, 0);
  EXPECT_EQ(two.labels.assignments, (std::vector<std::size_t>{0, 1}));

  Dataset miss(2, 1);
  miss.set(0, 0, 1);
  miss.set_missing(1, 0);
  EXPECT_THROW(kmeans(miss, 1, 0), Error);
  EXPECT_THROW(kmeans(d, 4, 0), UsageError);
}

TEST(KMeans, SeparatedBlobsAndMonotoneObjective) {
  std::vector<std::size_t> truth;
  const auto d = blobs3(truth);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = kmeans(d, 3, seed);
    EXPECT_EQ(pairwise_agreement(r.labels, canonical_labels(truth)), 1.0);
    for (std::size_t i = 1; i < r.objective.size(); ++i)
      EXPECT_LE(r.objective[i], r.objective[i - 1] * (1 + 1e-12));
    EXPECT_EQ(kmeans(d, 3, seed, 300, 4).labels, r.labels);
  }
  // Many clusters on few points exercises empty-cluster reseeding.
  const auto many = kmeans(d, 40, 1);
  for (std::size_t i = 1; i < many.objective.size(); ++i)
    EXPECT_LE(many.objective[i], many.objective[i - 1] * (1 + 1e-12));
}

TEST(ZScore, Fixtures) {
  const auto z = zscore_normalize(Dataset::from_rows({{1}, {3}}));
  EXPECT_EQ(z.value(0, 0), -1.0);
  EXPECT_EQ(z.value(1, 0), 1.0);

  const auto again = zscore_normalize(z);
  EXPECT_NEAR(again.value(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(again.value(1, 0), 1.0, 1e-12);

  Dataset m(3, 1);
  m.set(0, 0, 1);
  m.set_missing(1, 0);
  m.set(2, 0, 3);
  const auto zm = zscore_normalize(m);
  EXPECT_FALSE(zm.present(1, 0));
  EXPECT_EQ(zm.value(0, 0), -1.0);
  EXPECT_EQ(zm.value(2, 0), 1.0);

  std::vector<std::size_t> flat;
  const auto c = zscore_normalize(Dataset::from_rows({{1, 5}, {2, 5}}), &flat);
  EXPECT_EQ(flat, (std::vector<std::size_t>{1}));
  EXPECT_EQ(c.value(0, 1), 0.0);
}

TEST(MeanImpute, FillsColumnMean) {
  Dataset m(3, 1);
  m.set(0, 0, 1);
  m.set_missing(1, 0);
  m.set(2, 0, 3);
  const auto f = mean_impute(m);
  EXPECT_TRUE(f.complete());
  EXPECT_EQ(f.value(1, 0), 2.0);
}

}  // namespace
}  // namespace kt
