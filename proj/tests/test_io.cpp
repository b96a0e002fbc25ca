#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "subrank/error.hpp"
#include "subrank/io.hpp"
#include "subrank/linear.hpp"
#include "subrank/metrics.hpp"

using namespace subrank;

namespace {

Dataset letor(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_letor(in, opts);
}

Dataset csv(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_scores_csv(in, opts);
}

double mean_ndcg(const Dataset& data, std::size_t list, std::size_t k) {
  double s = 0.0;
  std::size_t used = 0;
  for (const auto& q : data.queries) {
    const RelevanceJudgments rel(*q.relevance());
    if (*std::max_element(rel.values().begin(), rel.values().end()) == 0.0) continue;
    s += ndcg_at_k(ranking_from_scores(q.list(list)), rel, k, ConcaveGain::log2_discount());
    ++used;
  }
  return s / static_cast<double>(used);
}

}  // namespace

TEST_CASE("parse_letor fixtures") {
  const auto d = letor("2 qid:1 1:0.5 2:1.0 3:-2 # doc a\n0 qid:1 1:0.1 2:0.2 3:0.3\n");
  REQUIRE(d.queries.size() == 1);
  CHECK(d.num_lists() == 3);
  CHECK(d.queries[0].num_candidates() == 2);
  CHECK(d.queries[0].list(2)[0] == -2.0);
  CHECK(*d.queries[0].relevance() == std::vector<double>{2, 0});

  std::ostringstream big;
  for (int doc = 0; doc < 40; ++doc) {
    big << (doc % 3) << " qid:7";
    for (int f = 1; f <= 46; ++f) big << ' ' << f << ':' << (doc * 0.01 + f);
    big << '\n';
  }
  const auto mq = letor(big.str());
  CHECK(mq.queries[0].num_candidates() == 40);
  CHECK(mq.num_lists() == 46);
}

TEST_CASE("parse_letor groups queries and accepts CRLF") {
  const auto d = letor("1 qid:b 1:1 2:2\r\n0 qid:a 1:3 2:4\r\n\r\n2 qid:b 1:5 2:6\r\n");
  REQUIRE(d.queries.size() == 2);
  CHECK(d.queries[0].id() == "b");
  CHECK(d.queries[0].num_candidates() == 2);
  CHECK(d.queries[1].id() == "a");
}

TEST_CASE("parse_letor errors carry line numbers") {
  try {
    letor("1 qid:1 1:1 2:2 3:3\n0 qid:1 1:1 3:3\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(letor("1 1:1 2:2\n"), ParseError);
  CHECK_THROWS_AS(letor("x qid:1 1:1\n"), ParseError);
  CHECK_THROWS_AS(letor("1 qid:1 2:1 1:1\n"), ParseError);
  CHECK_THROWS_AS(letor("1 qid:1 1:1 2:2\n1 qid:1 1:1 2:2 3:3\n"), ParseError);
  CHECK_THROWS_AS(letor(""), InvalidInput);

  ParseOptions lenient;
  lenient.strict = false;
  const auto filled = letor("1 qid:1 1:1 2:2 3:3\n0 qid:1 1:1 3:3\n", lenient);
  CHECK(filled.queries[0].list(1)[1] == 0.0);
  CHECK(filled.provenance.find("fill") != std::string::npos);
}

TEST_CASE("parse_scores_csv fixtures") {
  const auto d = csv("query_id,candidate_id,ranker_0,ranker_1\nq,2,0.3,1\nq,0,0.1,2\nq,1,0.2,3\n");
  REQUIRE(d.queries.size() == 1);
  CHECK(d.num_lists() == 2);
  CHECK(d.queries[0].list(0).values()[0] == 0.1);
  CHECK(d.queries[0].list(1).values()[2] == 1.0);
  CHECK_FALSE(d.queries[0].relevance().has_value());

  const auto r = csv("query_id,candidate_id,a,relevance\n\"q,1\",0,1,2\n\"q,1\",1,2,0\n");
  CHECK(r.queries[0].id() == "q,1");
  CHECK(*r.queries[0].relevance() == std::vector<double>{2, 0});

  CHECK_THROWS_AS(csv("query_id,candidate_id,a\nq,0,1\nq,0,2\n"), ParseError);
  CHECK_THROWS_AS(csv("query_id,candidate_id,a\nq,0,1,5\n"), ParseError);
  CHECK_THROWS_AS(csv("qid,cid,a\nq,0,1\n"), ParseError);
  CHECK_THROWS_AS(csv("query_id,candidate_id,a\nq,0,\n"), ParseError);
  CHECK_THROWS_AS(csv("query_id,candidate_id,a\nq,0,\"1\n"), ParseError);
}

TEST_CASE("round trips") {
  SynthConfig cfg;
  cfg.num_queries = 7;
  cfg.num_candidates = 5;
  cfg.seed = 4;
  const auto data = synth_planted(cfg);

  std::ostringstream c;
  write_scores_csv(data, c);
  std::istringstream cin(c.str());
  const auto back = parse_scores_csv(cin);
  CHECK(back.queries == data.queries);

  std::ostringstream l;
  write_letor(data, l);
  std::istringstream lin(l.str());
  CHECK(parse_letor(lin).queries == data.queries);

  const auto dir = std::filesystem::temp_directory_path() / "subrank_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "d.csv");
    f << c.str();
    std::ofstream g(dir / "d.txt");
    g << l.str();
  }
  CHECK(load_dataset(dir / "d.csv").queries == data.queries);
  CHECK(load_dataset(dir / "d.txt").queries == data.queries);
  CHECK_THROWS_AS(load_dataset(dir / "missing.csv"), InvalidInput);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv_escape") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("pairwise_feature_transform") {
  const std::vector<double> a{0.0, 1.0, 3.5};
  CHECK(pairwise_feature_transform(a, a) == std::vector<double>{0.0, 0.0, 0.0});
  const std::vector<double> e{std::exp(1.0) - 1.0};
  const std::vector<double> z{0.0};
  CHECK(pairwise_feature_transform(e, z)[0] == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> b{2.0, 0.5, 0.0};
  const auto ab = pairwise_feature_transform(a, b);
  const auto ba = pairwise_feature_transform(b, a);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ab[i] == -ba[i]);
  CHECK_THROWS_AS(pairwise_feature_transform(std::vector<double>{-1.0}, z), InvalidInput);
  CHECK_THROWS_AS(pairwise_feature_transform(a, z), InvalidInput);
}

TEST_CASE("synth_planted") {
  SynthConfig cfg;
  cfg.num_queries = 50;
  cfg.seed = 1;
  const auto data = synth_planted(cfg);
  CHECK(data.queries.size() == 50);
  for (const auto& q : data.queries) {
    CHECK(ranking_from_scores(q.list(0)) == RelevanceJudgments(*q.relevance()).ideal_order());
  }
  CHECK(synth_planted(cfg).queries == data.queries);

  SynthConfig a;
  a.num_queries = 500;
  a.noise_levels = {1.0};
  a.seed = 10;
  SynthConfig b = a;
  b.seed = 20;
  CHECK(std::abs(mean_ndcg(synth_planted(a), 0, 5) - mean_ndcg(synth_planted(b), 0, 5)) <= 0.02);

  SynthConfig one;
  one.num_queries = 5;
  one.noise_levels = {0.5};
  const auto single = synth_planted(one);
  std::ostringstream out;
  write_scores_csv(single, out);
  std::istringstream in(out.str());
  const auto parsed = parse_scores_csv(in);
  CHECK(train_linear(parsed.queries, LinearHyper{}, ConcaveGain::logistic(), TrainSettings{})
            .model.w[0] == 1.0);
}

TEST_CASE("normalize_minmax") {
  const QueryInstance q("q", {ScoreList({0, 5, 10}), ScoreList({3, 3, 3})});
  const auto n = normalize_minmax(q);
  CHECK(n.list(0).values()[1] == 0.5);
  CHECK(n.list(0).values()[2] == 1.0);
  for (double v : n.list(1).values()) CHECK(v == 0.5);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(9);
    for (auto& v : x) v = std::round(g(rng));
    const QueryInstance r("r", {ScoreList(x)});
    const auto m = normalize_minmax(r);
    CHECK(ranking_from_scores(m.list(0)) == ranking_from_scores(r.list(0)));
    for (double v : m.list(0).values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }

  ParseOptions norm;
  norm.normalize = true;
  const auto d = letor("1 qid:1 1:2 2:9\n0 qid:1 1:4 2:9\n", norm);
  CHECK(d.queries[0].list(0).values()[1] == 1.0);
}
