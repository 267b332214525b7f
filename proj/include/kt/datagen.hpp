#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/hierarchy.hpp"
#include "kt/rng.hpp"

namespace kt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct CirclesShape {
  double factor = 0.5;
  double noise = 0.05;
};
struct MoonsShape {
  double noise = 0.05;
};
struct BlobsShape {
  std::vector<Point2> centers{{-5.0, -5.0}, {0.0, 5.0}, {5.0, -5.0}};
  std::vector<double> stds{1.0, 1.0, 1.0};
};
// Blobs followed by the linear map (x, y) -> (a x + b y, c x + d y).
struct AnisoShape {
  std::array<double, 4> transform{0.6, -0.6, -0.4, 0.8};
  BlobsShape blobs{};
};
struct VariedShape {
  std::vector<double> stds{1.0, 2.5, 0.5};
  std::vector<Point2> centers{{-5.0, -5.0}, {0.0, 5.0}, {5.0, -5.0}};
};
struct UniformShape {};

using Shape = std::variant<CirclesShape, MoonsShape, BlobsShape, AnisoShape, VariedShape,
                           UniformShape>;

struct ShapeSpec {
  Shape shape = CirclesShape{};
  std::size_t n = 1500;
  std::uint64_t seed = 0;
};

struct GeneratedData {
  Dataset data;
  ClusterLabels labels;
};

namespace detail {

// Component sizes differ by at most one; earlier components get the extra.
inline std::vector<std::size_t> split_sizes(std::size_t n, std::size_t parts) {
  std::vector<std::size_t> s(parts, n / parts);
  for (std::size_t i = 0; i < n % parts; ++i) ++s[i];
  return s;
}

inline GeneratedData make_blobs(std::size_t n, const std::vector<Point2>& centers,
                                const std::vector<double>& stds, Rng& rng) {
  if (centers.empty() || centers.size() != stds.size())
    throw UsageError("blobs need one std per center");
  for (double s : stds)
    if (!(s >= 0.0)) throw UsageError("blob std must be non-negative");
  GeneratedData g{Dataset(n, 2), {}};
  std::vector<std::size_t> raw;
  std::size_t i = 0;
  const auto sizes = split_sizes(n, centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t m = 0; m < sizes[c]; ++m, ++i) {
      const auto [zx, zy] = rng.normal_pair();
      g.data.set(i, 0, centers[c].x + stds[c] * zx);
      g.data.set(i, 1, centers[c].y + stds[c] * zy);
      raw.push_back(c);
    }
  g.labels = canonical_labels(raw);
  return g;
}

}  // namespace detail

/// Synthetic 2-D benchmark data. Curve shapes use evenly spaced angles with
/// isotropic Gaussian noise; each point consumes one Box-Muller pair (x
/// noise, y noise) in point order. Uniform draws x then y per point.
inline GeneratedData generate(const ShapeSpec& spec) {
  if (spec.n == 0) throw UsageError("n must be positive");
  Rng rng(spec.seed);
  const std::size_t n = spec.n;
  constexpr double pi = std::numbers::pi;

  auto curve = [&](double noise, std::size_t n_outer, auto&& outer, auto&& inner) {
    if (!(noise >= 0.0)) throw UsageError("noise must be non-negative");
    GeneratedData g{Dataset(n, 2), {}};
    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool out = i < n_outer;
      const Point2 pt = out ? outer(i) : inner(i - n_outer);
      const auto [zx, zy] = rng.normal_pair();
      g.data.set(i, 0, pt.x + noise * zx);
      g.data.set(i, 1, pt.y + noise * zy);
      raw[i] = out ? 0 : 1;
    }
    g.labels = canonical_labels(raw);
    return g;
  };

  if (const auto* s = std::get_if<CirclesShape>(&spec.shape)) {
    if (!(s->factor > 0.0 && s->factor < 1.0)) throw UsageError("circle factor must be in (0, 1)");
    const std::size_t n_out = n - n / 2, n_in = n / 2;
    return curve(
        s->noise, n_out,
        [&](std::size_t i) {
          const double t = 2.0 * pi * double(i) / double(n_out);
          return Point2{std::cos(t), std::sin(t)};
        },
        [&](std::size_t i) {
          const double t = 2.0 * pi * double(i) / double(n_in);
          return Point2{s->factor * std::cos(t), s->factor * std::sin(t)};
        });
  }
  if (const auto* s = std::get_if<MoonsShape>(&spec.shape)) {
    const std::size_t n_out = n - n / 2, n_in = n / 2;
    auto angle = [](std::size_t i, std::size_t m) {
      return m > 1 ? pi * double(i) / double(m - 1) : 0.0;
    };
    return curve(
        s->noise, n_out,
        [&](std::size_t i) {
          const double t = angle(i, n_out);
          return Point2{std::cos(t), std::sin(t)};
        },
        [&](std::size_t i) {
          const double t = angle(i, n_in);
          return Point2{1.0 - std::cos(t), 0.5 - std::sin(t)};
        });
  }
  if (const auto* s = std::get_if<BlobsShape>(&spec.shape))
    return detail::make_blobs(n, s->centers, s->stds, rng);
  if (const auto* s = std::get_if<VariedShape>(&spec.shape))
    return detail::make_blobs(n, s->centers, s->stds, rng);
  if (const auto* s = std::get_if<AnisoShape>(&spec.shape)) {
    auto g = detail::make_blobs(n, s->blobs.centers, s->blobs.stds, rng);
    const auto& m = s->transform;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.data.value(i, 0), y = g.data.value(i, 1);
      g.data.set(i, 0, m[0] * x + m[1] * y);
      g.data.set(i, 1, m[2] * x + m[3] * y);
    }
    return g;
  }
  GeneratedData g{Dataset(n, 2), {std::vector<std::size_t>(n, 0), 1}};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    g.data.set(i, 0, x);
    g.data.set(i, 1, y);
  }
  return g;
}

/// Shape from its CLI name with default parameters.
inline Shape shape_from_name(const std::string& name) {
  if (name == "circles") return CirclesShape{};
  if (name == "moons") return MoonsShape{};
  if (name == "blobs") return BlobsShape{};
  if (name == "aniso") return AnisoShape{};
  if (name == "varied") return VariedShape{};
  if (name == "uniform") return UniformShape{};
  throw UsageError("unknown shape '" + name + "'");
}

}  // namespace kt
