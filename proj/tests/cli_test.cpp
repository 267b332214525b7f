#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "kt/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(KT_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  json load(const std::string& name) const {
    return json::parse(kt::io::read_file(path(name)));
  }

  fs::path dir_;
};

TEST_F(Cli, GenerateClusterEvalRoc) {
  ASSERT_EQ(run("generate --shape blobs --n 120 --seed 3 -o " + path("b.csv")).code, 0);
  const auto data = kt::io::read_file(path("b.csv"));
  EXPECT_EQ(data.rfind("x,y,label\n", 0), 0u);

  const auto c = run("cluster --input " + path("b.csv") +
                     " --kernel rbf:sigma=2 --clusters 3 --sample-size full -o " + path("l.json") +
                     " --tree " + path("t.json"));
  ASSERT_EQ(c.code, 0) << c.out;
  const auto labels = load("l.json");
  EXPECT_EQ(labels["n"], 120);
  EXPECT_EQ(labels["n_clusters"], 3);
  EXPECT_EQ(labels["kernel"]["name"], "rbf");
  EXPECT_TRUE(fs::exists(path("l.json.manifest.json")));
  EXPECT_TRUE(fs::exists(path("t.json.manifest.json")));
  const auto manifest = load("l.json.manifest.json");
  EXPECT_EQ(manifest["inputs"][0]["fnv1a64"], kt::io::digest(data));
  EXPECT_TRUE(manifest.contains("runtime"));

  const auto e = run("eval --pred " + path("l.json") + " --reference " + path("b.csv"));
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_NE(e.out.find("TPR 1.000000 FPR 0.000000"), std::string::npos) << e.out;

  const auto r = run("roc --tree " + path("t.json") + " --reference " + path("b.csv") + " -o " +
                     path("roc.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("AUC 1.000000"), std::string::npos) << r.out;
  EXPECT_EQ(kt::io::read_file(path("roc.csv")).rfind("fpr,tpr\n", 0), 0u);
}

TEST_F(Cli, ThreadCountDoesNotChangeOutputs) {
  ASSERT_EQ(run("generate --shape circles --n 200 --seed 1 -o " + path("c.csv")).code, 0);
  for (const char* t : {"1", "4"}) {
    const auto c = run("cluster --input " + path("c.csv") +
                       " --kernel rbf:sigma=0.1 --clusters 2 --sample-size 100 --seed 5 --threads " +
                       t + " -o " + path(std::string("l") + t + ".json") + " --tree " +
                       path(std::string("t") + t + ".json"));
    ASSERT_EQ(c.code, 0) << c.out;
  }
  EXPECT_EQ(kt::io::read_file(path("l1.json")), kt::io::read_file(path("l4.json")));
  EXPECT_EQ(kt::io::read_file(path("t1.json")), kt::io::read_file(path("t4.json")));
  auto m1 = load("l1.json.manifest.json"), m4 = load("l4.json.manifest.json");
  m1.erase("runtime");
  m4.erase("runtime");
  m1["outputs"] = m4["outputs"] = nullptr;
  EXPECT_EQ(m1["config"], m4["config"]);
}

TEST_F(Cli, ExitCodes) {
  ASSERT_EQ(run("generate --shape moons --n 50 -o " + path("m.csv")).code, 0);
  EXPECT_EQ(run("cluster --input " + path("m.csv") + " --kernel linear --clusters 0 -o " + path("x.json")).code, 2);
  EXPECT_EQ(run("cluster --input " + path("m.csv") + " --kernel bogus --clusters 2 -o " +
                path("x.json"))
                .code,
            2);
  EXPECT_EQ(run("cluster --input " + path("m.csv") + " --kernel rbf:sigma=-1 --clusters 2 -o " +
                path("x.json"))
                .code,
            2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("--help").code, 0);

  kt::io::write_file(path("bad.csv"), "x,y\n1,2\n3,oops\n");
  const auto bad = run("cluster --input " + path("bad.csv") + " --kernel linear --clusters 1 -o " + path("x.json"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("row 2 column 2"), std::string::npos) << bad.out;
  EXPECT_EQ(run("cluster --input " + path("missing.csv") + " --kernel linear --clusters 1 -o " + path("x.json")).code,
            1);
}

TEST_F(Cli, GraphInputAndUnreachableCut) {
  kt::io::write_file(path("g.txt"), "0 1\n1 2\n0 2\n3 4\n");
  const auto ok = run("cluster --input " + path("g.txt") + " --kernel graph --clusters 2 -o " +
                      path("g.json") + " --tree " + path("gt.json"));
  ASSERT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(load("g.json")["labels"], json::parse("[0,0,0,1,1]"));
  const auto r = run("roc --tree " + path("gt.json") + " --reference " + path("g.txt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("AUC 1.000000"), std::string::npos) << r.out;

  const auto cut = run("cluster --input " + path("g.txt") + " --kernel graph --clusters 1 -o " +
                       path("g1.json"));
  EXPECT_EQ(cut.code, 1);
  EXPECT_NE(cut.out.find("minimum 2 clusters"), std::string::npos) << cut.out;
}

TEST_F(Cli, KMeansAndNormalize) {
  kt::io::write_file(path("d.csv"), "a,b\n0,0\n0,1\n10,NA\n10,11\n");
  const auto miss = run("kmeans --input " + path("d.csv") + " --k 2 -o " + path("k.json"));
  EXPECT_EQ(miss.code, 1);
  const auto k = run("kmeans --input " + path("d.csv") + " --k 2 --impute-mean -o " + path("k.json"));
  ASSERT_EQ(k.code, 0) << k.out;
  EXPECT_EQ(load("k.json")["labels"], json::parse("[0,0,1,1]"));
  EXPECT_EQ(load("k.json")["method"], "kmeans");

  const auto z = run("normalize --input " + path("d.csv") + " -o " + path("z.csv"));
  ASSERT_EQ(z.code, 0) << z.out;
  const auto zd = kt::io::read_csv_numeric(path("z.csv"));
  EXPECT_EQ(zd.value(0, 0), -1.0);
  EXPECT_FALSE(zd.present(2, 1));
}

TEST_F(Cli, RocOverFlatPartitions) {
  ASSERT_EQ(run("generate --shape blobs --n 90 --seed 2 -o " + path("b.csv")).code, 0);
  std::string preds;
  for (int k = 1; k <= 4; ++k) {
    const auto f = path("k" + std::to_string(k) + ".json");
    ASSERT_EQ(run("kmeans --input " + path("b.csv") + " --k " + std::to_string(k) + " -o " + f).code,
              0);
    preds += " " + f;
  }
  const auto r = run("roc --pred" + preds + " --reference " + path("b.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("AUC"), std::string::npos);
}

}  // namespace
