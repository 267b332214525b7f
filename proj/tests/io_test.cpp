#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "kt/io.hpp"

namespace kt {
namespace {

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Csv, ParsesValuesAndMissing) {
  const auto d = io::parse_csv_numeric("a,b\n1,2\n3,NA\r\n");
  ASSERT_EQ(d.rows(), 2u);
  ASSERT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.column_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.value(0, 0), 1.0);
  EXPECT_EQ(d.value(1, 0), 3.0);
  EXPECT_TRUE(d.present(0, 1));
  EXPECT_FALSE(d.present(1, 1));

  io::CsvOptions opt;
  opt.has_header = false;
  const auto h = io::parse_csv_numeric("1, 2\n,+4e1\n", opt);
  EXPECT_FALSE(h.present(1, 0));
  EXPECT_EQ(h.value(1, 1), 40.0);
}

TEST(Csv, Errors) {
  EXPECT_EQ(error_of([] { io::parse_csv_numeric("a,b\n1,x\n"); }),
            "cannot parse 'x' at row 1 column 2");
  EXPECT_EQ(error_of([] { io::parse_csv_numeric("a,b\n1,2\n1\n"); }),
            "row 2 has 1 fields, expected 2");
  EXPECT_EQ(error_of([] { io::parse_csv_numeric("a,b\n1,2\nNA,\n"); }),
            "row 2 has no observed attributes");
  EXPECT_FALSE(error_of([] { io::parse_csv_numeric("a\ninf\n"); }).empty());
  EXPECT_FALSE(error_of([] { io::parse_csv_numeric(""); }).empty());
  EXPECT_THROW(io::read_csv_numeric("/nonexistent/file.csv"), Error);
}

TEST(Csv, IgnoresNamedColumns) {
  io::CsvOptions opt;
  opt.ignore_columns = {"label"};
  const auto d = io::parse_csv_numeric("x,label,y\n1,a,2\n", opt);
  EXPECT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.value(0, 1), 2.0);
}

TEST(Csv, WriteReadRoundTrip) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + gen() % 20, p = 1 + gen() % 5;
    Dataset d(n, p);
    for (std::size_t j = 0; j < p; ++j) d.column_names().push_back("c" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        if (j > 0 && gen() % 4 == 0)
          d.set_missing(i, j);
        else
          d.set(i, j, u(gen) * std::ldexp(1.0, int(gen() % 40) - 20));
      }
    EXPECT_EQ(io::parse_csv_numeric(io::format_csv(d)), d);
  }
}

TEST(EdgeList, Fixture) {
  const auto g = io::parse_edge_list("# comment\n0 1\n\n1 2\n");
  EXPECT_EQ(g.vertices(), 3u);
  EXPECT_EQ(g.edges(), 2u);
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_EQ(g.degree(2), 1u);
}

TEST(EdgeList, EmptyAndErrors) {
  const auto g = io::parse_edge_list("");
  EXPECT_EQ(g.vertices(), 0u);
  EXPECT_EQ(g.edges(), 0u);
  EXPECT_EQ(error_of([] { io::parse_edge_list("0 1\n2 2\n"); }), "self-loop at line 2");
  EXPECT_EQ(error_of([] { io::parse_edge_list("0 1\n\n0 x\n"); }), "malformed edge at line 3");
  EXPECT_EQ(error_of([] { io::parse_edge_list("0 1 2\n"); }), "malformed edge at line 1");
  EXPECT_THROW(io::parse_edge_list("0 99999999999\n"), Error);
}

TEST(EdgeList, LineOrderDoesNotMatter) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::string> lines;
    for (int e = 0; e < 50; ++e) {
      const auto u = gen() % 30, v = gen() % 30;
      if (u != v) lines.push_back(std::to_string(u) + " " + std::to_string(v));
    }
    lines.push_back("0 29");
    auto join = [](const std::vector<std::string>& ls) {
      std::string s;
      for (const auto& l : ls) s += l + "\n";
      return s;
    };
    const auto a = io::parse_edge_list(join(lines));
    std::shuffle(lines.begin(), lines.end(), gen);
    EXPECT_EQ(io::parse_edge_list(join(lines)), a);
  }
}

TEST(EdgeList, Remap) {
  const auto g = io::parse_edge_list("100 5000000\n5000000 7\n", true);
  EXPECT_EQ(g.vertices(), 3u);
  EXPECT_EQ(g.original_ids(), (std::vector<std::uint64_t>{7, 100, 5000000}));
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 1));
}

TEST(ClassLabels, ColumnChoice) {
  EXPECT_EQ(io::parse_class_labels("x,label,y\n1,b,2\n3,a,4\n5,b,6\n"),
            (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(io::parse_class_labels("x,y\n1,7\n2,8\n3,7\n"), (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_THROW(io::parse_class_labels(""), Error);
}

TEST(Json, LabelsRoundTrip) {
  const auto l = canonical_labels({3, 3, 1, 0});
  const auto j = io::labels_json(l, 9, io::to_json(RbfKernel{0.5}));
  EXPECT_EQ(j["kernel"]["name"], "rbf");
  EXPECT_EQ(io::labels_from_json(io::json::parse(j.dump())), l);
  auto bad = j;
  bad["n"] = 7;
  EXPECT_THROW(io::labels_from_json(bad), Error);
  EXPECT_THROW(io::labels_from_json(io::json::object()), Error);
}

TEST(Json, DendrogramRoundTrip) {
  const Dendrogram t{4, {{1, 1, 0, 0.75}, {2, 3, 2, 0.5}}};
  const auto f = io::dendrogram_from_json(io::json::parse(io::dendrogram_json(t, {2, 5, 8, 9}).dump()));
  EXPECT_EQ(f.tree, t);
  EXPECT_EQ(f.leaves, (std::vector<std::size_t>{2, 5, 8, 9}));
  EXPECT_THROW(io::dendrogram_from_json(io::json::parse(R"({"n_leaves":2,"merges":[[1,0,0,1]]})")),
               Error);
}

TEST(Json, KernelSpecs) {
  EXPECT_EQ(io::to_json(GraphKernel{}).at("diag"), "auto");
  EXPECT_EQ(io::to_json(GraphKernel{3.0}).at("diag"), 3.0);
  EXPECT_EQ(io::to_json(PolynomialKernel{2, 1, 3}).at("r"), 3);
}

TEST(Roc, CsvFormat) {
  EXPECT_EQ(io::format_roc_csv({{{0, 0}, {0.25, 1.0 / 3}, {1, 1}}}),
            "fpr,tpr\n0,0\n0.25,0.3333333333\n1,1\n");
}

TEST(Digest, Fnv1a) {
  EXPECT_EQ(io::digest(""), "cbf29ce484222325");
  EXPECT_EQ(io::digest("a"), "af63dc4c8601ec8c");
}

}  // namespace
}  // namespace kt
