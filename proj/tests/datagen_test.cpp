#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kt/datagen.hpp"

namespace kt {
namespace {

TEST(Generate, ZeroNoiseCirclesLieOnRadii) {
  const auto g = generate({CirclesShape{0.5, 0.0}, 4, 1});
  for (std::size_t i = 0; i < 4; ++i) {
    const double r = std::hypot(g.data.value(i, 0), g.data.value(i, 1));
    EXPECT_NEAR(r, g.labels.assignments[i] == 0 ? 1.0 : 0.5, 1e-15);
  }
  const auto big = generate({CirclesShape{0.3, 0.0}, 301, 2});
  for (std::size_t i = 0; i < 301; ++i) {
    const double r = std::hypot(big.data.value(i, 0), big.data.value(i, 1));
    EXPECT_NEAR(r, big.labels.assignments[i] == 0 ? 1.0 : 0.3, 1e-15);
  }
}

TEST(Generate, ZeroNoiseMoonsOnArcs) {
  const auto g = generate({MoonsShape{0.0}, 101, 1});
  for (std::size_t i = 0; i < 101; ++i) {
    double x = g.data.value(i, 0), y = g.data.value(i, 1);
    if (g.labels.assignments[i] == 1) {
      x = 1.0 - x;
      y = 0.5 - y;
    }
    EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-15);
  }
}

TEST(Generate, UniformInUnitSquare) {
  const auto g = generate({UniformShape{}, 1000, 7});
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_GE(g.data.value(i, 0), 0.0);
    EXPECT_LT(g.data.value(i, 0), 1.0);
    EXPECT_GE(g.data.value(i, 1), 0.0);
    EXPECT_LT(g.data.value(i, 1), 1.0);
    mx += g.data.value(i, 0);
    my += g.data.value(i, 1);
  }
  const double sigma = std::sqrt(1.0 / 12.0 / 1000.0);
  EXPECT_LT(std::abs(mx / 1000 - 0.5), 5 * sigma);
  EXPECT_LT(std::abs(my / 1000 - 0.5), 5 * sigma);
  EXPECT_EQ(g.labels.n_clusters, 1u);
}

TEST(Generate, DegenerateBlob) {
  const auto g = generate({BlobsShape{{{0, 0}}, {0.0}}, 10, 3});
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(g.data.value(i, 0), 0.0);
    EXPECT_EQ(g.data.value(i, 1), 0.0);
  }
}

TEST(Generate, DeterministicAndBalanced) {
  const std::vector<Shape> shapes{CirclesShape{}, MoonsShape{}, BlobsShape{},
                                  AnisoShape{},   VariedShape{}, UniformShape{}};
  for (const auto& s : shapes) {
    const auto a = generate({s, 101, 5});
    const auto b = generate({s, 101, 5});
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_NE(a.data, generate({s, 101, 6}).data);
    std::vector<std::size_t> counts(a.labels.n_clusters, 0);
    for (auto l : a.labels.assignments) ++counts[l];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    EXPECT_LE(*hi - *lo, 1u);
  }
}

TEST(Generate, InvalidSpecs) {
  EXPECT_THROW(generate({CirclesShape{1.5, 0.0}, 10, 0}), UsageError);
  EXPECT_THROW(generate({BlobsShape{{{0, 0}}, {1.0, 2.0}}, 10, 0}), UsageError);
  EXPECT_THROW(generate({UniformShape{}, 0, 0}), UsageError);
  EXPECT_THROW(shape_from_name("spiral"), UsageError);
}

}  // namespace
}  // namespace kt
