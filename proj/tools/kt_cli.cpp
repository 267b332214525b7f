// kt: command-line front end for kernel treelet clustering.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kt/kt.hpp"

namespace {

using nlohmann::json;
constexpr const char* kVersion = "kt 0.1.0";

std::set<std::string> split_set(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(item);
  if (!s.empty() && s.back() == ',') out.insert("");
  return out;
}

struct CsvFlags {
  bool no_header = false;
  std::string missing = ",NA,NaN";
  std::string ignore = "label,class";

  void add(CLI::App* cmd) {
    cmd->add_flag("--no-header", no_header, "Input CSV has no header row");
    cmd->add_option("--missing", missing,
                    "Comma-separated tokens read as missing (empty token included by a "
                    "leading comma)")
        ->capture_default_str();
    cmd->add_option("--ignore-columns", ignore,
                    "Comma-separated header names excluded from the features")
        ->capture_default_str();
  }
  kt::io::CsvOptions options() const {
    kt::io::CsvOptions o;
    o.has_header = !no_header;
    o.missing_tokens = split_set(missing);
    o.ignore_columns = no_header ? std::set<std::string>{} : split_set(ignore);
    o.ignore_columns.erase("");
    return o;
  }
};

class Manifest {
public:
  Manifest(std::string command, json config)
      : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["config"] = std::move(config);
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["runtime"] = {{"timings_ms", json::object()}};
  }
  void input(const std::string& path, const std::string& bytes) {
    doc_["inputs"].push_back({{"path", path}, {"fnv1a64", kt::io::digest(bytes)}});
  }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  void timing(const std::string& stage, double ms) { doc_["runtime"]["timings_ms"][stage] = ms; }
  void threads(unsigned n) { doc_["runtime"]["threads"] = n; }
  void write(const std::string& primary_output) {
    timing("total", std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start_).count());
    kt::io::write_file(primary_output + ".manifest.json", doc_.dump(2) + "\n");
  }

private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

void write_output(Manifest& m, const std::string& path, const std::string& content) {
  kt::io::write_file(path, content);
  m.output(path);
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string shape = "circles";
  std::size_t n = 1500;
  std::uint64_t seed = 0;
  std::optional<double> noise;
  std::optional<double> factor;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  kt::ShapeSpec spec{kt::shape_from_name(a.shape), a.n, a.seed};
  if (auto* c = std::get_if<kt::CirclesShape>(&spec.shape)) {
    if (a.noise) c->noise = *a.noise;
    if (a.factor) c->factor = *a.factor;
  } else if (auto* m = std::get_if<kt::MoonsShape>(&spec.shape)) {
    if (a.noise) m->noise = *a.noise;
  } else if (a.noise || a.factor) {
    throw kt::UsageError("--noise/--factor apply to circles and moons only");
  }
  if (a.factor && !std::holds_alternative<kt::CirclesShape>(spec.shape))
    throw kt::UsageError("--factor applies to circles only");

  Manifest man("generate", {{"shape", a.shape},
                            {"n", a.n},
                            {"seed", a.seed},
                            {"noise", a.noise ? json(*a.noise) : json(nullptr)},
                            {"factor", a.factor ? json(*a.factor) : json(nullptr)}});
  const auto g = kt::generate(spec);
  write_output(man, a.out, kt::io::format_labeled_points(g.data, g.labels));
  man.write(a.out);
  return 0;
}

struct ClusterArgs {
  std::string input;
  std::string input_format = "auto";
  std::string kernel;
  std::size_t clusters = 0;
  std::string sample_size = "full";
  double lambda = 0.0;
  std::size_t knn_k = 5;
  std::uint64_t seed = 0;
  double stop_tol = 1e-10;
  unsigned threads = 0;
  bool remap_ids = false;
  std::string out;
  std::string tree_out;
  CsvFlags csv;
};

int run_cluster(const ClusterArgs& a) {
  if (a.clusters == 0) throw kt::UsageError("--clusters must be at least 1");
  kt::KtConfig cfg;
  cfg.kernel = kt::parse_kernel_spec(a.kernel);
  cfg.n_clusters = a.clusters;
  cfg.lambda = a.lambda;
  cfg.knn_k = a.knn_k;
  cfg.seed = a.seed;
  cfg.stop_tol = a.stop_tol;
  cfg.threads = a.threads == 0 ? kt::default_threads() : a.threads;
  if (a.sample_size != "full") {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(a.sample_size, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != a.sample_size.size() || v == 0)
      throw kt::UsageError("--sample-size must be a positive integer or 'full'");
    cfg.sample_size = static_cast<std::size_t>(v);
  }

  std::string format = a.input_format;
  if (format == "auto") format = kt::is_graph_kernel(cfg.kernel) ? "edges" : "csv";
  if (format != "csv" && format != "edges")
    throw kt::UsageError("--input-format must be auto, csv or edges");
  if ((format == "edges") != kt::is_graph_kernel(cfg.kernel))
    throw kt::UsageError("the graph kernel needs edge-list input and vice versa");

  const auto t0 = std::chrono::steady_clock::now();
  const std::string bytes = kt::io::read_file(a.input);
  kt::FitResult fit;
  json kernel_json;
  std::size_t n = 0;
  double read_ms = 0.0;
  auto since = [](auto t) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t)
        .count();
  };
  if (format == "edges") {
    const kt::Graph g = kt::io::parse_edge_list(bytes, a.remap_ids);
    read_ms = since(t0);
    const kt::GraphAdjacencyKernel probe(cfg.kernel, g);
    cfg.kernel = probe.spec();  // resolve diag=auto
    std::cerr << "graph: " << g.vertices() << " vertices, " << g.edges()
              << " edges, kernel diag " << probe.diag() << "\n";
    fit = kt::fit_predict(g, cfg);
    n = g.vertices();
  } else {
    const kt::Dataset d = kt::io::parse_csv_numeric(bytes, a.csv.options());
    read_ms = since(t0);
    fit = kt::fit_predict(d, cfg);
    n = d.rows();
  }
  kernel_json = kt::io::to_json(cfg.kernel);

  json config{{"input_format", format},
              {"kernel", kernel_json},
              {"clusters", cfg.n_clusters},
              {"sample_size", cfg.sample_size == 0 ? n : cfg.sample_size},
              {"lambda", cfg.lambda},
              {"knn_k", cfg.knn_k},
              {"seed", cfg.seed},
              {"stop_tol", cfg.stop_tol},
              {"remap_ids", a.remap_ids}};
  if (format == "csv") {
    const auto o = a.csv.options();
    config["csv"] = {{"has_header", o.has_header},
                     {"missing_tokens", o.missing_tokens},
                     {"ignore_columns", o.ignore_columns}};
  }
  Manifest man("cluster", config);
  man.input(a.input, bytes);
  man.threads(cfg.threads);
  man.timing("read", read_ms);
  man.timing("sample", fit.timings.sample_ms);
  man.timing("gram", fit.timings.gram_ms);
  man.timing("decompose", fit.timings.decompose_ms);
  man.timing("cut", fit.timings.cut_ms);
  man.timing("extend", fit.timings.extend_ms);

  write_output(man, a.out,
               kt::io::labels_json(fit.labels, cfg.seed, kernel_json).dump() + "\n");
  if (!a.tree_out.empty()) {
    write_output(man, a.tree_out, kt::io::dendrogram_json(fit.tree, fit.sample).dump() + "\n");
    Manifest tman = man;
    tman.write(a.tree_out);
  }
  if (!fit.decomposition.complete())
    std::cerr << "note: decomposition stopped early at level " << fit.decomposition.stop_level()
              << " of " << fit.decomposition.p - 1 << "\n";
  man.write(a.out);
  return 0;
}

kt::PairReference load_reference(const std::string& path, const std::string& kind,
                                 bool remap, std::string& bytes) {
  bytes = kt::io::read_file(path);
  std::string k = kind;
  if (k == "auto") k = path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? "classes" : "graph";
  if (k == "classes") return kt::PairReference::from_classes(kt::io::parse_class_labels(bytes));
  if (k == "graph") return kt::PairReference::from_graph(kt::io::parse_edge_list(bytes, remap));
  throw kt::UsageError("--reference-kind must be auto, classes or graph");
}

struct RocArgs {
  std::string tree;
  std::vector<std::string> preds;
  std::string reference;
  std::string reference_kind = "auto";
  bool remap_ids = false;
  std::string out;
};

int run_roc(const RocArgs& a) {
  if (a.tree.empty() == a.preds.empty())
    throw kt::UsageError("give exactly one of --tree or --pred");
  Manifest man("roc", {{"tree", a.tree},
                       {"pred", a.preds},
                       {"reference", a.reference},
                       {"reference_kind", a.reference_kind},
                       {"remap_ids", a.remap_ids}});
  std::string ref_bytes;
  const auto ref = load_reference(a.reference, a.reference_kind, a.remap_ids, ref_bytes);
  man.input(a.reference, ref_bytes);

  kt::RocCurve curve;
  if (!a.tree.empty()) {
    const std::string bytes = kt::io::read_file(a.tree);
    man.input(a.tree, bytes);
    kt::io::TreeFile tf;
    try {
      tf = kt::io::dendrogram_from_json(json::parse(bytes));
    } catch (const json::parse_error& e) {
      throw kt::Error(std::string("malformed tree JSON: ") + e.what());
    }
    curve = kt::roc_from_hierarchy(tf.tree, tf.leaves.empty() ? ref : ref.restrict(tf.leaves));
  } else {
    std::vector<kt::ClusterLabels> parts;
    for (const auto& p : a.preds) {
      const std::string bytes = kt::io::read_file(p);
      man.input(p, bytes);
      try {
        parts.push_back(kt::io::labels_from_json(json::parse(bytes)));
      } catch (const json::parse_error& e) {
        throw kt::Error(std::string("malformed labels JSON: ") + e.what());
      }
    }
    curve = kt::roc_from_partitions(parts, ref);
  }
  const double area = kt::auc(curve);
  std::printf("AUC %.6f\n", area);
  if (!a.out.empty()) {
    write_output(man, a.out, kt::io::format_roc_csv(curve));
    man.write(a.out);
  }
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string reference;
  std::string reference_kind = "auto";
  bool remap_ids = false;
};

int run_eval(const EvalArgs& a) {
  std::string ref_bytes;
  const auto ref = load_reference(a.reference, a.reference_kind, a.remap_ids, ref_bytes);
  kt::ClusterLabels pred;
  try {
    pred = kt::io::labels_from_json(json::parse(kt::io::read_file(a.pred)));
  } catch (const json::parse_error& e) {
    throw kt::Error(std::string("malformed labels JSON: ") + e.what());
  }
  const auto m = kt::matching_matrix(pred, ref);
  std::printf("TP %llu FP %llu TN %llu FN %llu\n", (unsigned long long)m.tp,
              (unsigned long long)m.fp, (unsigned long long)m.tn, (unsigned long long)m.fn);
  std::printf("TPR %.6f FPR %.6f\n", m.tpr(), m.fpr());
  return 0;
}

struct KMeansArgs {
  std::string input;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  bool impute = false;
  unsigned threads = 0;
  std::string out;
  CsvFlags csv;
};

int run_kmeans(const KMeansArgs& a) {
  if (a.k == 0) throw kt::UsageError("--k must be at least 1");
  const std::string bytes = kt::io::read_file(a.input);
  kt::Dataset d = kt::io::parse_csv_numeric(bytes, a.csv.options());
  if (a.impute) d = kt::mean_impute(d);
  const unsigned threads = a.threads == 0 ? kt::default_threads() : a.threads;
  Manifest man("kmeans", {{"k", a.k}, {"seed", a.seed}, {"max_iters", a.max_iters},
                          {"impute", a.impute ? "mean" : "none"}});
  man.input(a.input, bytes);
  man.threads(threads);
  const auto r = kt::kmeans(d, a.k, a.seed, a.max_iters, threads);
  json j = kt::io::labels_json(r.labels, a.seed, nullptr);
  j["method"] = "kmeans";
  write_output(man, a.out, j.dump() + "\n");
  man.write(a.out);
  return 0;
}

struct NormalizeArgs {
  std::string input;
  std::string out;
  CsvFlags csv;
};

int run_normalize(const NormalizeArgs& a) {
  const std::string bytes = kt::io::read_file(a.input);
  const kt::Dataset d = kt::io::parse_csv_numeric(bytes, a.csv.options());
  std::vector<std::size_t> flat;
  const kt::Dataset z = kt::zscore_normalize(d, &flat);
  for (std::size_t j : flat)
    std::cerr << "warning: column " << j + 1 << " has zero variance; written as zeros\n";
  Manifest man("normalize", {{"method", "zscore-population"}});
  man.input(a.input, bytes);
  write_output(man, a.out, kt::io::format_csv(z));
  man.write(a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel treelet hierarchical clustering"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic 2-D dataset (x,y,label)");
  g->add_option("--shape", gen.shape, "circles|moons|blobs|aniso|varied|uniform")
      ->capture_default_str();
  g->add_option("--n", gen.n, "Number of points")->capture_default_str();
  g->add_option("--seed", gen.seed, "PRNG seed")->capture_default_str();
  g->add_option("--noise", gen.noise, "Noise std (circles, moons)");
  g->add_option("--factor", gen.factor, "Inner/outer radius ratio (circles)");
  g->add_option("-o,--output", gen.out, "Output CSV")->required();

  ClusterArgs cl;
  auto* c = app.add_subcommand("cluster", "Kernel treelet clustering");
  c->add_option("--input", cl.input, "CSV dataset or edge-list graph")->required();
  c->add_option("--input-format", cl.input_format, "auto|csv|edges")->capture_default_str();
  c->add_option("--kernel", cl.kernel,
                "rbf:sigma=S | linear | poly:alpha=A,c0=C,r=R | missing-rbf:gamma=G | "
                "graph:diag=D|auto")
      ->required();
  c->add_option("--clusters", cl.clusters, "Number of flat clusters to cut")->required();
  c->add_option("--sample-size", cl.sample_size, "Sample size, or 'full'")
      ->capture_default_str();
  c->add_option("--lambda", cl.lambda, "Similarity regularization")->capture_default_str();
  c->add_option("--knn-k", cl.knn_k, "Neighbors for out-of-sample labels (odd)")
      ->capture_default_str();
  c->add_option("--seed", cl.seed, "Sampling seed")->capture_default_str();
  c->add_option("--stop-tol", cl.stop_tol, "Stop when the best similarity falls below this")
      ->capture_default_str();
  c->add_option("--threads", cl.threads, "Worker threads (0: all cores)")->capture_default_str();
  c->add_flag("--remap-ids", cl.remap_ids, "Map sparse edge-list ids to 0..m-1");
  c->add_option("-o,--output", cl.out, "Labels JSON")->required();
  c->add_option("--tree", cl.tree_out, "Dendrogram JSON");
  cl.csv.add(c);

  RocArgs ra;
  auto* r = app.add_subcommand("roc", "ROC curve and AUC of a hierarchy or flat clusterings");
  r->add_option("--tree", ra.tree, "Dendrogram JSON from `cluster --tree`");
  r->add_option("--pred", ra.preds, "One or more labels JSON files (flat clusterings)");
  r->add_option("--reference", ra.reference, "Class CSV or edge-list graph")->required();
  r->add_option("--reference-kind", ra.reference_kind, "auto|classes|graph")
      ->capture_default_str();
  r->add_flag("--remap-ids", ra.remap_ids, "Map sparse edge-list ids to 0..m-1");
  r->add_option("-o,--output", ra.out, "ROC CSV (fpr,tpr)");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Pairwise matching matrix, TPR and FPR");
  e->add_option("--pred", ea.pred, "Labels JSON")->required();
  e->add_option("--reference", ea.reference, "Class CSV or edge-list graph")->required();
  e->add_option("--reference-kind", ea.reference_kind, "auto|classes|graph")
      ->capture_default_str();
  e->add_flag("--remap-ids", ea.remap_ids, "Map sparse edge-list ids to 0..m-1");

  KMeansArgs ka;
  auto* k = app.add_subcommand("kmeans", "k-means++ / Lloyd baseline");
  k->add_option("--input", ka.input, "CSV dataset")->required();
  k->add_option("--k", ka.k, "Number of clusters")->required();
  k->add_option("--seed", ka.seed, "Seeding PRNG seed")->capture_default_str();
  k->add_option("--max-iters", ka.max_iters, "Lloyd iteration cap")->capture_default_str();
  k->add_flag("--impute-mean", ka.impute, "Fill missing cells with column means first");
  k->add_option("--threads", ka.threads, "Worker threads (0: all cores)")->capture_default_str();
  k->add_option("-o,--output", ka.out, "Labels JSON")->required();
  ka.csv.add(k);

  NormalizeArgs na;
  auto* z = app.add_subcommand("normalize", "Z-score columns over observed entries");
  z->add_option("--input", na.input, "CSV dataset")->required();
  z->add_option("-o,--output", na.out, "Output CSV")->required();
  na.csv.add(z);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*g) return run_generate(gen);
    if (*c) return run_cluster(cl);
    if (*r) return run_roc(ra);
    if (*e) return run_eval(ea);
    if (*k) return run_kmeans(ka);
    if (*z) return run_normalize(na);
  } catch (const kt::UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
