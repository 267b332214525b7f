#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kt/dataset.hpp"
#include "kt/error.hpp"
#include "kt/eval.hpp"
#include "kt/hierarchy.hpp"
#include "kt/kernels.hpp"

namespace kt::io {

using nlohmann::json;

struct CsvOptions {
  bool has_header = true;
  std::set<std::string> missing_tokens{"", "NA", "NaN"};
  // Header names of columns to skip (annotation columns such as class labels).
  std::set<std::string> ignore_columns;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

/// FNV-1a 64-bit digest, hex encoded.
inline std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Comma-separated fields; double-quoted fields may contain commas and "".
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

inline bool parse_double(std::string_view s, double& v) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(v);
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline Dataset parse_csv_numeric(const std::string& text, const CsvOptions& opt = {}) {
  auto lines = detail::split_lines(text);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  std::vector<std::string> names;
  std::size_t first = 0;
  if (opt.has_header) {
    if (lines.empty()) throw Error("missing CSV header");
    names = detail::split_csv(lines[0]);
    first = 1;
  }
  if (!opt.ignore_columns.empty() && !opt.has_header)
    throw UsageError("ignoring columns by name requires a header");

  std::vector<std::size_t> keep;
  std::size_t width = names.size();
  if (!opt.has_header && first < lines.size()) width = detail::split_csv(lines[first]).size();
  for (std::size_t j = 0; j < width; ++j)
    if (!opt.has_header || !opt.ignore_columns.count(names[j])) keep.push_back(j);

  Dataset d(lines.size() - first, keep.size());
  for (std::size_t j : keep)
    if (opt.has_header) d.column_names().push_back(names[j]);
  for (std::size_t r = first; r < lines.size(); ++r) {
    const std::size_t row = r - first;
    const auto cells = detail::split_csv(lines[r]);
    if (cells.size() != width)
      throw Error("row " + std::to_string(row + 1) + " has " + std::to_string(cells.size()) +
                  " fields, expected " + std::to_string(width));
    bool any = false;
    for (std::size_t m = 0; m < keep.size(); ++m) {
      const std::string& cell = cells[keep[m]];
      if (opt.missing_tokens.count(cell)) {
        d.set_missing(row, m);
        continue;
      }
      double v = 0.0;
      if (!detail::parse_double(cell, v))
        throw Error("cannot parse '" + cell + "' at row " + std::to_string(row + 1) +
                    " column " + std::to_string(keep[m] + 1));
      d.set(row, m, v);
      any = true;
    }
    if (!any && !keep.empty())
      throw Error("row " + std::to_string(row + 1) + " has no observed attributes");
  }
  return d;
}

inline Dataset read_csv_numeric(const std::string& path, const CsvOptions& opt = {}) {
  return parse_csv_numeric(read_file(path), opt);
}

/// Missing cells are written empty; values use shortest round-trip form.
inline std::string format_csv(const Dataset& d) {
  std::string out;
  if (!d.column_names().empty()) {
    for (std::size_t j = 0; j < d.column_names().size(); ++j)
      out += (j ? "," : "") + d.column_names()[j];
    out += '\n';
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (j) out += ',';
      if (d.present(i, j)) out += detail::format_double(d.value(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path, const Dataset& d) {
  write_file(path, format_csv(d));
}

/// Dataset plus an integer label column, header `x,y,label` for 2-D data.
inline std::string format_labeled_points(const Dataset& d, const ClusterLabels& labels) {
  std::string out = "x,y,label\n";
  if (d.cols() != 2) throw Error("labeled point output expects 2-D data");
  for (std::size_t i = 0; i < d.rows(); ++i)
    out += detail::format_double(d.value(i, 0)) + "," + detail::format_double(d.value(i, 1)) +
           "," + std::to_string(labels.assignments[i]) + "\n";
  return out;
}

constexpr std::uint64_t max_dense_vertex_id = 1u << 20;

/// Parses "u v" lines. Blank lines and lines starting with '#' are skipped.
/// Without remapping, vertex ids must not exceed 2^20 and the vertex count
/// is max id + 1; with remapping, sorted distinct ids map to 0..m-1.
inline Graph parse_edge_list(const std::string& text, bool remap = false) {
  const auto lines = detail::split_lines(text);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view s = detail::trim(lines[ln]);
    if (s.empty() || s.front() == '#') continue;
    std::uint64_t ids[2];
    for (auto& id : ids) {
      s = detail::trim(s);
      const auto res = std::from_chars(s.data(), s.data() + s.size(), id);
      if (res.ec != std::errc() || (res.ptr != s.data() + s.size() && *res.ptr != ' ' &&
                                    *res.ptr != '\t'))
        throw Error("malformed edge at line " + std::to_string(ln + 1));
      s.remove_prefix(static_cast<std::size_t>(res.ptr - s.data()));
    }
    if (!detail::trim(s).empty()) throw Error("malformed edge at line " + std::to_string(ln + 1));
    if (ids[0] == ids[1]) throw Error("self-loop at line " + std::to_string(ln + 1));
    if (!remap && std::max(ids[0], ids[1]) > max_dense_vertex_id)
      throw Error("vertex id at line " + std::to_string(ln + 1) +
                  " exceeds 2^20; read with id remapping");
    raw.emplace_back(ids[0], ids[1]);
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(raw.size());
  if (!remap) {
    std::size_t n = 0;
    for (auto [u, v] : raw) n = std::max<std::size_t>(n, std::max(u, v) + 1);
    for (auto [u, v] : raw) edges.emplace_back(u, v);
    return Graph::from_edges(n, std::move(edges));
  }
  std::vector<std::uint64_t> ids;
  for (auto [u, v] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto pos = [&](std::uint64_t id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  for (auto [u, v] : raw) edges.emplace_back(pos(u), pos(v));
  Graph g = Graph::from_edges(ids.size(), std::move(edges));
  g.original_ids() = std::move(ids);
  return g;
}

inline Graph read_edge_list(const std::string& path, bool remap = false) {
  return parse_edge_list(read_file(path), remap);
}

/// Class labels from a headed CSV: the `label` or `class` column if present,
/// otherwise the last column. Values are arbitrary strings, numbered in order
/// of first appearance.
inline std::vector<std::size_t> parse_class_labels(const std::string& text) {
  auto lines = detail::split_lines(text);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error("class label file is empty");
  const auto header = detail::split_csv(lines[0]);
  std::size_t col = header.size() - 1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == "label" || header[j] == "class") col = j;
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::size_t> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = detail::split_csv(lines[r]);
    if (cells.size() != header.size())
      throw Error("row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                  " fields, expected " + std::to_string(header.size()));
    auto [it, fresh] = ids.try_emplace(cells[col], ids.size());
    out.push_back(it->second);
  }
  return out;
}

inline std::vector<std::size_t> read_class_labels(const std::string& path) {
  return parse_class_labels(read_file(path));
}

inline json to_json(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RbfKernel>) return {{"name", "rbf"}, {"sigma", k.sigma}};
        if constexpr (std::is_same_v<K, LinearKernel>) return {{"name", "linear"}};
        if constexpr (std::is_same_v<K, PolynomialKernel>)
          return {{"name", "poly"}, {"alpha", k.alpha}, {"c0", k.c0}, {"r", k.degree}};
        if constexpr (std::is_same_v<K, MissingRbfKernel>)
          return {{"name", "missing-rbf"}, {"gamma", k.gamma}};
        if constexpr (std::is_same_v<K, GraphKernel>) {
          json j{{"name", "graph"}};
          j["diag"] = k.diag ? json(*k.diag) : json("auto");
          return j;
        }
      },
      spec);
}

inline json labels_json(const ClusterLabels& labels, std::uint64_t seed, const json& kernel) {
  return {{"n", labels.size()},
          {"n_clusters", labels.n_clusters},
          {"labels", labels.assignments},
          {"seed", seed},
          {"kernel", kernel}};
}

inline ClusterLabels labels_from_json(const json& j) {
  try {
    ClusterLabels l;
    l.assignments = j.at("labels").get<std::vector<std::size_t>>();
    l.n_clusters = j.at("n_clusters").get<std::size_t>();
    if (j.at("n").get<std::size_t>() != l.size()) throw Error("label count does not match n");
    for (std::size_t a : l.assignments)
      if (a >= l.n_clusters) throw Error("label id out of range");
    return l;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed labels JSON: ") + e.what());
  }
}

/// {"n_leaves", "merges": [[step, removed, kept, score], ...]} plus, when
/// given, "leaves": the item id carried by each leaf.
inline json dendrogram_json(const Dendrogram& tree, const std::vector<std::size_t>& leaves = {}) {
  json merges = json::array();
  for (const auto& m : tree.merges) merges.push_back({m.step, m.removed, m.kept, m.score});
  json j{{"n_leaves", tree.n_leaves}, {"merges", std::move(merges)}};
  if (!leaves.empty()) j["leaves"] = leaves;
  return j;
}

struct TreeFile {
  Dendrogram tree;
  std::vector<std::size_t> leaves;  // empty: leaf i is item i
};

inline TreeFile dendrogram_from_json(const json& j) {
  try {
    TreeFile f;
    f.tree.n_leaves = j.at("n_leaves").get<std::size_t>();
    for (const auto& m : j.at("merges")) {
      if (!m.is_array() || m.size() != 4) throw Error("merge entries must have 4 fields");
      f.tree.merges.push_back({m[0].get<std::size_t>(), m[1].get<std::size_t>(),
                               m[2].get<std::size_t>(), m[3].get<double>()});
    }
    if (j.contains("leaves")) f.leaves = j.at("leaves").get<std::vector<std::size_t>>();
    if (!f.leaves.empty() && f.leaves.size() != f.tree.n_leaves)
      throw Error("leaf list does not match n_leaves");
    f.tree.validate();
    return f;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed tree JSON: ") + e.what());
  }
}

/// `fpr,tpr` rows with 10 significant digits.
inline std::string format_roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  char buf[64];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", p.fpr, p.tpr);
    out += buf;
  }
  return out;
}

inline json roc_json(const RocCurve& curve) {
  json pts = json::array();
  for (const auto& p : curve.points) pts.push_back({p.fpr, p.tpr});
  return {{"points", std::move(pts)}, {"auc", auc(curve)}};
}

}  // namespace kt::io
