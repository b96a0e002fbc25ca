#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "subrank/model_io.hpp"
#include "subrank/text.hpp"

using namespace subrank;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "subrank");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("subrank_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const TempDir& dir() {
  static TempDir d;
  return d;
}

std::string synth_fixture() {
  static const std::string path = [] {
    const auto p = dir() / "synth.csv";
    REQUIRE(run({"synth", "--out", p, "--queries", "40", "--seed", "7"}).code == 0);
    return p;
  }();
  return path;
}

std::string line_starting(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  return {};
}

std::size_t count_rows(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST_CASE("train writes a simplex-valid linear model and a log") {
  const auto model = dir() / "lin.model";
  const auto r = run({"train", "--data", synth_fixture(), "--out", model, "--epochs", "5"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto parsed = std::get<LinearModel>(load_model(model));
  double s = 0.0;
  for (double v : parsed.w.values()) {
    CHECK(v >= 0.0);
    s += v;
  }
  CHECK(std::abs(s - 1.0) <= 1e-9);
  const auto log = slurp(model + ".log.csv");
  CHECK(log.rfind("epoch,objective,weights\n", 0) == 0);
}

TEST_CASE("training output is byte-identical across runs and thread counts") {
  const auto a = dir() / "a.model";
  const auto b = dir() / "b.model";
  REQUIRE(run({"train", "--data", synth_fixture(), "--out", a, "--epochs", "3", "--seed", "9"}).code == 0);
  REQUIRE(run({"train", "--data", synth_fixture(), "--out", b, "--epochs", "3", "--seed", "9",
               "--threads", "4"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a + ".log.csv") == slurp(b + ".log.csv"));

  const auto na = dir() / "na.model";
  const auto nb = dir() / "nb.model";
  REQUIRE(run({"train", "--model", "nested", "--k2", "3", "--data", synth_fixture(), "--out", na,
               "--epochs", "2"}).code == 0);
  REQUIRE(run({"train", "--model", "nested", "--k2", "3", "--data", synth_fixture(), "--out", nb,
               "--epochs", "2", "--threads", "3"}).code == 0);
  CHECK(slurp(na) == slurp(nb));
}

TEST_CASE("nested with one hidden unit reproduces the linear model file") {
  const auto lin = dir() / "red_lin.model";
  const auto nes = dir() / "red_nes.model";
  REQUIRE(run({"train", "--data", synth_fixture(), "--out", lin, "--epochs", "4", "--lambda", "0.02"}).code == 0);
  REQUIRE(run({"train", "--model", "nested", "--k2", "1", "--phi1", "identity", "--phi2", "identity",
               "--lambda1", "0.02", "--lambda2", "0.02", "--data", synth_fixture(), "--out", nes,
               "--epochs", "4"}).code == 0);
  const auto w = line_starting(slurp(lin), "w ");
  REQUIRE_FALSE(w.empty());
  CHECK(line_starting(slurp(nes), "W1 ") == w);
}

TEST_CASE("usage and data errors map to exit codes") {
  CHECK(run({"train", "--data", synth_fixture(), "--out", dir() / "x", "--mu", "0"}).code == 2);
  CHECK(run({"train", "--data", synth_fixture(), "--out", dir() / "x", "--lambda", "-1"}).code == 2);
  CHECK(run({"train", "--data", synth_fixture(), "--out", dir() / "x", "--samples", "0"}).code == 2);
  CHECK(run({"train", "--data", synth_fixture(), "--out", dir() / "x", "--gain", "bogus"}).code == 2);
  CHECK(run({"train", "--unknown-flag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train", "--data", dir() / "none.csv", "--out", dir() / "x"}).code == 3);
  spit(dir() / "bad.csv", "query_id,candidate_id,a\nq,0,1\nq,0,2\n");
  const auto bad = run({"train", "--data", dir() / "bad.csv", "--out", dir() / "x"});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("line 3") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("infer with a uniform model equals the averaging baseline byte for byte") {
  const auto model = dir() / "uniform.model";
  spit(model, "subrank-model\nformat_version 1\nkind linear\nK 5\ngain logistic\nw 0.2 0.2 0.2 0.2 0.2\n");
  const auto a = run({"infer", "--data", synth_fixture(), "--model_file", model});
  const auto b = run({"infer", "--data", synth_fixture(), "--method", "average"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("query_id,rank,candidate_id,aggregated_score\n", 0) == 0);
}

TEST_CASE("infer with a single-ranker model echoes that ranker") {
  spit(dir() / "one.csv", "query_id,candidate_id,r\nq,0,0.5\nq,1,2\nq,2,-1\n");
  spit(dir() / "one.model", "subrank-model\nformat_version 1\nkind linear\nK 1\ngain logistic\nw 1\n");
  const auto r = run({"infer", "--data", dir() / "one.csv", "--model_file", dir() / "one.model"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "query_id,rank,candidate_id,aggregated_score\nq,1,1,2\nq,2,0,0.5\nq,3,2,-1\n");
  // K mismatch between model and data
  CHECK(run({"infer", "--data", synth_fixture(), "--model_file", dir() / "one.model"}).code == 3);
}

TEST_CASE("eval reports Top-k columns and perfect rankings score 1") {
  const auto model = dir() / "clean.model";
  spit(model, "subrank-model\nformat_version 1\nkind linear\nK 5\ngain logistic\nw 1 0 0 0 0\n");
  const auto report = dir() / "report.csv";
  const auto r = run({"eval", "--data", synth_fixture(), "--model_file", model, "--k_max", "7",
                      "--discount", "log2", "--out", report});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.rfind("Methods", 0) == 0);
  CHECK(r.out.find("Top-7") != std::string::npos);
  CHECK(r.out.find("Top-8") == std::string::npos);
  const auto row = line_starting(r.out, "Linear-LBD");
  CHECK(row.find("1.0000") != std::string::npos);
  CHECK(row.find("0.") == std::string::npos);
  const auto mean = line_starting(slurp(report), "Linear-LBD,MEAN,");
  CHECK(mean == "1,1,1,1,1,1,1");

  spit(dir() / "norel.csv", "query_id,candidate_id,r\nq,0,0.5\nq,1,2\n");
  CHECK(run({"eval", "--data", dir() / "norel.csv"}).code == 3);
}

TEST_CASE("config file values are overridden by flags") {
  const auto cfg = dir() / "run.cfg";
  spit(cfg, "# training run\nmu=0\nepochs=2\n");
  CHECK(run({"train", "--config", cfg, "--data", synth_fixture(), "--out", dir() / "c.model"}).code == 2);
  const auto ok = run({"train", "--config", cfg, "--mu", "0.2", "--data", synth_fixture(), "--out",
                       dir() / "c.model"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("for 2 epochs") != std::string::npos);
  spit(dir() / "typo.cfg", "epochz=2\n");
  CHECK(run({"train", "--config", dir() / "typo.cfg", "--data", synth_fixture(), "--out",
             dir() / "c.model"}).code == 2);
}

TEST_CASE("synth writes both formats deterministically") {
  REQUIRE(run({"synth", "--out", dir() / "s1.txt", "--queries", "3", "--noise", "0,1"}).code == 0);
  REQUIRE(run({"synth", "--out", dir() / "s2.txt", "--queries", "3", "--noise", "0,1"}).code == 0);
  CHECK(slurp(dir() / "s1.txt") == slurp(dir() / "s2.txt"));
  CHECK(slurp(dir() / "s1.txt").find("qid:") != std::string::npos);
  CHECK(run({"synth", "--out", dir() / "s3.dat", "--format", "xml"}).code == 2);
}

TEST_CASE("bench sweeps and degenerate single point") {
  const auto r = run({"bench", "--bench_candidates", "8", "--bench_lists", "2", "--bench_doublings", "2",
                      "--bench_queries", "2", "--bench_repeats", "1", "--samples", "5", "--burn_in", "5",
                      "--axes", "N,K"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(count_rows(r.out, "N ") == 3);
  CHECK(count_rows(r.out, "K ") == 3);
  CHECK(count_rows(r.out, "K1K2") == 0);
  const auto single = run({"bench", "--bench_doublings", "0", "--bench_queries", "2", "--bench_repeats",
                           "1", "--samples", "5", "--axes", "N"});
  REQUIRE(single.code == 0);
  CHECK(single.out.find("SUPERLINEAR") == std::string::npos);
  CHECK(single.out.find("all steps within") != std::string::npos);
  CHECK(run({"bench", "--axes", "Q"}).code == 2);
}
