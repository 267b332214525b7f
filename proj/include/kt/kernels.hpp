#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/parallel.hpp"
#include "kt/sym_matrix.hpp"

namespace kt {

struct RbfKernel {
  double sigma = 1.0;
};
struct LinearKernel {};
struct PolynomialKernel {
  double alpha = 1.0;
  double c0 = 0.0;
  int degree = 2;
};
// exp(-gamma * mean squared difference over attributes observed in both rows)
struct MissingRbfKernel {
  double gamma = 1.0;
};
// diag on the diagonal, 1 for adjacent vertices, 0 otherwise. An empty diag
// resolves to the maximum vertex degree of the graph.
struct GraphKernel {
  std::optional<double> diag;
};

using KernelSpec =
    std::variant<RbfKernel, LinearKernel, PolynomialKernel, MissingRbfKernel, GraphKernel>;

inline bool is_graph_kernel(const KernelSpec& spec) {
  return std::holds_alternative<GraphKernel>(spec);
}

inline void validate(const KernelSpec& spec) {
  if (auto* k = std::get_if<RbfKernel>(&spec); k && !(k->sigma > 0.0))
    throw UsageError("rbf sigma must be positive");
  if (auto* k = std::get_if<MissingRbfKernel>(&spec); k && !(k->gamma > 0.0))
    throw UsageError("missing-rbf gamma must be positive");
  if (auto* k = std::get_if<PolynomialKernel>(&spec); k && k->degree < 1)
    throw UsageError("polynomial degree must be at least 1");
  if (auto* k = std::get_if<GraphKernel>(&spec); k && k->diag && !(*k->diag > 0.0))
    throw UsageError("graph diag must be positive");
}

/// Kernel value between two numeric observations.
inline double eval_kernel(const KernelSpec& spec, RowView x, RowView y) {
  if (x.values.size() != y.values.size()) throw Error("dimension mismatch");
  const std::size_t p = x.values.size();

  if (const auto* k = std::get_if<MissingRbfKernel>(&spec)) {
    double sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t i = 0; i < p; ++i) {
      if (!x.present[i] || !y.present[i]) continue;
      const double d = x.values[i] - y.values[i];
      sum += d * d;
      ++shared;
    }
    if (shared == 0) throw Error("no shared observed attributes");
    return std::exp(-k->gamma * sum / static_cast<double>(shared));
  }
  if (std::holds_alternative<GraphKernel>(spec))
    throw UsageError("graph kernel requires graph input");

  for (std::size_t i = 0; i < p; ++i)
    if (!x.present[i] || !y.present[i])
      throw Error("kernel requires complete data; use missing-rbf");

  if (const auto* k = std::get_if<RbfKernel>(&spec)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double d = x.values[i] - y.values[i];
      sum += d * d;
    }
    return std::exp(-sum / (2.0 * k->sigma * k->sigma));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < p; ++i) dot += x.values[i] * y.values[i];
  if (std::holds_alternative<LinearKernel>(spec)) return dot;
  const auto& poly = std::get<PolynomialKernel>(spec);
  return std::pow(poly.alpha * dot + poly.c0, poly.degree);
}

/// Diagonal used by the graph kernel on `g`.
inline double graph_kernel_diag(const GraphKernel& k, const Graph& g) {
  const double max_deg = static_cast<double>(g.max_degree());
  if (!k.diag) return max_deg > 0.0 ? max_deg : 1.0;
  if (*k.diag < max_deg)
    throw Error("graph kernel diag " + std::to_string(*k.diag) +
                " is below the maximum degree " + std::to_string(g.max_degree()));
  return *k.diag;
}

/// Graph kernel value between vertices u and v, with the diagonal resolved.
inline double eval_kernel(double diag, const Graph& g, std::size_t u, std::size_t v) {
  if (u == v) return diag;
  return g.has_edge(u, v) ? 1.0 : 0.0;
}

/// Callable kernel over the rows of a dataset.
class DatasetKernel {
public:
  DatasetKernel(KernelSpec spec, const Dataset& data) : spec_(std::move(spec)), data_(&data) {
    validate(spec_);
    if (is_graph_kernel(spec_)) throw UsageError("graph kernel requires graph input");
  }
  std::size_t size() const { return data_->rows(); }
  double operator()(std::size_t i, std::size_t j) const {
    return eval_kernel(spec_, data_->row(i), data_->row(j));
  }
  const KernelSpec& spec() const { return spec_; }

private:
  KernelSpec spec_;
  const Dataset* data_;
};

/// Callable kernel over the vertices of a graph.
class GraphAdjacencyKernel {
public:
  GraphAdjacencyKernel(KernelSpec spec, const Graph& g) : graph_(&g) {
    validate(spec);
    const auto* k = std::get_if<GraphKernel>(&spec);
    if (!k) throw UsageError("graph input requires the graph kernel");
    diag_ = graph_kernel_diag(*k, g);
  }
  std::size_t size() const { return graph_->vertices(); }
  double operator()(std::size_t u, std::size_t v) const {
    return eval_kernel(diag_, *graph_, u, v);
  }
  double diag() const { return diag_; }
  KernelSpec spec() const { return GraphKernel{diag_}; }

private:
  const Graph* graph_;
  double diag_ = 1.0;
};

/// Gram matrix over `indices`. Each unordered pair is evaluated exactly once;
/// rows are distributed across workers and every cell has a single writer.
template <typename Kernel>
SymMatrix gram(const Kernel& kernel, std::span<const std::size_t> indices,
               unsigned threads = 1) {
  const std::size_t n = indices.size();
  {
    std::vector<char> seen(kernel.size(), 0);
    for (std::size_t id : indices) {
      if (id >= kernel.size()) throw Error("gram index out of range");
      if (seen[id]) throw Error("gram indices must be distinct");
      seen[id] = 1;
    }
  }
  SymMatrix a(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) a(i, j) = kernel(indices[i], indices[j]);
  });
  return a;
}

struct SpsdReport {
  bool symmetric = true;
  double min_eigenvalue_lower_bound = 0.0;
  bool diagonally_dominant = true;
};

/// Gershgorin check; advisory only. Storage is symmetric, so `symmetric`
/// reports whether every entry is finite.
inline SpsdReport check_spsd(const SymMatrix& k) {
  SpsdReport r;
  const std::size_t n = k.size();
  r.min_eigenvalue_lower_bound = n == 0 ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(k(i, j))) r.symmetric = false;
      if (j != i) off += std::abs(k(i, j));
    }
    const double bound = k(i, i) - off;
    r.min_eigenvalue_lower_bound = std::min(r.min_eigenvalue_lower_bound, bound);
    if (k(i, i) < off) r.diagonally_dominant = false;
  }
  return r;
}

namespace detail {

inline double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw UsageError("invalid value for " + std::string(what) + ": '" +
                     std::string(text) + "'");
  return v;
}

}  // namespace detail

/// Parses the `name:key=val,key=val` kernel grammar:
///   rbf:sigma=S | linear | poly:alpha=A,c0=C,r=R | missing-rbf:gamma=G |
///   graph:diag=D|auto
inline KernelSpec parse_kernel_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string name(text.substr(0, colon));
  std::map<std::string, std::string> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw UsageError("kernel parameter must be key=value: '" + std::string(item) + "'");
      params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  auto take = [&](const std::string& key, std::optional<double> fallback) -> double {
    auto it = params.find(key);
    if (it == params.end()) {
      if (!fallback) throw UsageError("kernel '" + name + "' requires " + key);
      return *fallback;
    }
    const double v = detail::parse_number(it->second, key);
    params.erase(it);
    return v;
  };

  KernelSpec spec;
  if (name == "rbf") {
    spec = RbfKernel{take("sigma", std::nullopt)};
  } else if (name == "linear") {
    spec = LinearKernel{};
  } else if (name == "poly") {
    const double alpha = take("alpha", 1.0);
    const double c0 = take("c0", 0.0);
    const double r = take("r", 2.0);
    if (r != std::floor(r)) throw UsageError("poly r must be an integer");
    spec = PolynomialKernel{alpha, c0, static_cast<int>(r)};
  } else if (name == "missing-rbf") {
    spec = MissingRbfKernel{take("gamma", std::nullopt)};
  } else if (name == "graph") {
    GraphKernel g;
    auto it = params.find("diag");
    if (it != params.end()) {
      if (it->second != "auto") g.diag = detail::parse_number(it->second, "diag");
      params.erase(it);
    }
    spec = g;
  } else {
    throw UsageError("unknown kernel '" + name + "'");
  }
  if (!params.empty())
    throw UsageError("unknown parameter '" + params.begin()->first + "' for kernel '" +
                     name + "'");
  validate(spec);
  return spec;
}

}  // namespace kt
