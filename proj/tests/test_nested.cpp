#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "subrank/error.hpp"
#include "subrank/io.hpp"
#include "subrank/metrics.hpp"
#include "subrank/nested.hpp"

using namespace subrank;

namespace {

/// Independent activation formulas for the finite-difference oracles.
double phi(Activation a, double t) {
  switch (a) {
    case Activation::shifted_logistic: return std::tanh(t / 2.0);
    case Activation::logistic: return 0.5 * (1.0 + std::tanh(t / 2.0));
    case Activation::identity: return t;
  }
  return t;
}

NestedModel make_model(const std::vector<std::vector<double>>& w1, std::vector<double> w2,
                       Activation phi1 = Activation::shifted_logistic,
                       Activation phi2 = Activation::shifted_logistic,
                       double lambda1 = 0.01, double lambda2 = 0.01) {
  std::vector<SimplexWeights> rows;
  for (const auto& r : w1) rows.emplace_back(r);
  NestedHyper hyper;
  hyper.lambda1 = lambda1;
  hyper.lambda2 = lambda2;
  return NestedModel{rows, SimplexWeights(std::move(w2)), ConcaveGain::logistic(), phi1, phi2, hyper};
}

QueryInstance random_query(std::mt19937_64& rng, std::size_t n, std::size_t k,
                           std::string id = "q") {
  std::vector<ScoreList> lists;
  for (std::size_t i = 0; i < k; ++i) lists.emplace_back(oracle::random_scores(rng, n, 0.0, 2.0));
  return QueryInstance(std::move(id), lists);
}

NestedModel random_model(std::mt19937_64& rng, std::size_t k1, std::size_t k2,
                         Activation phi1, Activation phi2, double lambda) {
  std::vector<std::vector<double>> w1;
  for (std::size_t i = 0; i < k2; ++i) w1.push_back(oracle::random_simplex(rng, k1));
  return make_model(w1, oracle::random_simplex(rng, k2), phi1, phi2, lambda, lambda);
}

}  // namespace

TEST_CASE("activations") {
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    for (auto a : {Activation::shifted_logistic, Activation::logistic, Activation::identity}) {
      CHECK(activate(a, t) == doctest::Approx(phi(a, t)).epsilon(1e-14));
      const double fd = (phi(a, t + 1e-6) - phi(a, t - 1e-6)) / 2e-6;
      CHECK(activate_derivative(a, t) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
  CHECK(activate(Activation::shifted_logistic, 0.0) == 0.0);
  CHECK(parse_activation("sigmoid") == Activation::logistic);
  CHECK(parse_activation("identity") == Activation::identity);
  CHECK_THROWS_AS(parse_activation("relu"), InvalidInput);
  CHECK(parse_nested_sampling("per_unit") == NestedSampling::per_unit);
  CHECK_THROWS_AS(parse_nested_sampling("x"), InvalidInput);
}

TEST_CASE("hidden_preactivation examples") {
  const QueryInstance flat("q", {ScoreList({1, 1, 1}), ScoreList({2, 2, 2})});
  const auto model = make_model({{0.5, 0.5}, {1.0, 0.0}}, {0.5, 0.5});
  ExpectationSettings exact;
  exact.backend = ExpectationBackend::exact;
  const auto e0 = unit_expectations(model, flat, exact, 0);
  CHECK(hidden_preactivation(model, e0) == std::vector<double>{0.0, 0.0});

  std::mt19937_64 rng(2);
  const auto q = random_query(rng, 4, 2);
  const auto e = unit_expectations(model, q, exact, 0);
  const auto delta1 = hidden_preactivation(model, e);
  // One-hot row reduces to the expectation of that list.
  CHECK(delta1[1] == doctest::Approx(e[1][0]).epsilon(1e-15));
  for (double v : delta1) CHECK(v >= 0.0);
}

TEST_CASE("per-unit chains track exact per-row expectations") {
  std::mt19937_64 rng(6);
  const auto q = random_query(rng, 4, 2);
  auto model = make_model({{0.8, 0.2}, {0.1, 0.9}}, {0.5, 0.5});
  model.hyper.sampling = NestedSampling::per_unit;
  ExpectationSettings chain;
  chain.chain.num_samples = 20000;
  chain.chain.burn_in = 500;
  const auto est = hidden_preactivation(model, unit_expectations(model, q, chain, 17));
  ExpectationSettings exact;
  exact.backend = ExpectationBackend::exact;
  const auto ref = hidden_preactivation(model, unit_expectations(model, q, exact, 0));
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(est[i] - ref[i]) <= 0.02 * ref[i]);
}

TEST_CASE("bottom_gradient examples") {
  const auto model = make_model({{0.5, 0.5}}, {1.0}, Activation::identity, Activation::identity, 0.0);
  const Matrix zero_e{{0.0, 0.0}};
  CHECK(bottom_gradient(model, zero_e, std::vector<double>{0.0}) == Matrix{{0.0, 0.0}});

  // Phi1'(delta1) = 0.25 is the logistic slope at zero.
  const auto logi = make_model({{0.5, 0.5}}, {1.0}, Activation::logistic, Activation::logistic, 0.01);
  const auto g = bottom_gradient(logi, Matrix{{0.5, 0.5}}, std::vector<double>{0.0});
  CHECK(g[0][0] == doctest::Approx(0.13).epsilon(1e-14));
}

TEST_CASE("top-layer examples") {
  const auto one_hot = make_model({{0.5, 0.5}, {0.2, 0.8}}, {0.0, 1.0});
  const std::vector<double> delta1{0.3, 0.7};
  CHECK(output_preactivation(one_hot, delta1) == doctest::Approx(phi(Activation::shifted_logistic, 0.7)));
  const auto mixed = make_model({{0.5, 0.5}, {0.2, 0.8}}, {0.25, 0.75});
  const std::vector<double> same{0.4, 0.4};
  CHECK(output_preactivation(mixed, same) == doctest::Approx(phi(Activation::shifted_logistic, 0.4)));
  // Golden value: 0.25 tanh(0.15) + 0.75 tanh(0.35).
  CHECK(output_preactivation(mixed, delta1) == doctest::Approx(0.2895029167).epsilon(1e-9));

  const auto lin = make_model({{1.0}}, {1.0}, Activation::identity, Activation::identity, 0.0, 0.0);
  CHECK(top_gradient(lin, 0.0, std::vector<double>{0.0}) == std::vector<double>{0.0});
  const auto logi = make_model({{1.0}, {1.0}}, {0.5, 0.5}, Activation::identity, Activation::logistic, 0.01, 0.01);
  const auto g2 = top_gradient(logi, 0.0, std::vector<double>{0.5, 0.5});
  CHECK(g2[0] == doctest::Approx(0.13).epsilon(1e-14));
}

TEST_CASE("layer updates") {
  auto model = make_model({{0.5, 0.5}, {1.0, 0.0}, {0.2, 0.8}}, {0.5, 0.5, 0.0});
  model.hyper.mu = 0.1;
  const auto next = update_W1(model, Matrix{{1.0, 0.0}, {-3.0, 5.0}, {2.0, 2.0}});
  const double e = std::exp(-0.1);
  CHECK(next.W1[0][0] == doctest::Approx(e / (1 + e)).epsilon(1e-15));
  CHECK(next.W1[1][0] == 1.0);
  CHECK(next.W1[2][1] == doctest::Approx(0.8).epsilon(1e-15));

  const auto top = update_W2(model, std::vector<double>{1.0, 0.0, -9.0});
  CHECK(top.W2[0] == doctest::Approx(e / (1 + e)).epsilon(1e-15));
  CHECK(top.W2[2] == 0.0);
  const auto flat = update_W2(model, std::vector<double>{4.0, 4.0, 4.0});
  CHECK(flat.W2[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(update_W1(model, Matrix{{1.0, 0.0}}), InvalidInput);
}

TEST_CASE("layer gradients match finite differences on frozen samples") {
  std::mt19937_64 rng(41);
  const Activation kinds[] = {Activation::shifted_logistic, Activation::logistic, Activation::identity};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const std::size_t k1 = 2 + trial % 3;
    const std::size_t k2 = 1 + trial % 4;
    const Activation p1 = kinds[trial % 3];
    const Activation p2 = kinds[(trial / 3) % 3];
    const auto q = random_query(rng, n, k1);
    const auto model = random_model(rng, k1, k2, p1, p2, 0.02);
    const EnergyContext ctx(q.lists(), model.aggregate_weights(), model.gain);
    const auto frozen = enumerate_distribution(ctx);
    const auto e = unit_expectations(model, q, frozen);
    const auto delta1 = hidden_preactivation(model, e);
    const auto g1 = bottom_gradient(model, e, delta1);

    std::vector<std::vector<double>> raw;
    for (const auto& l : q.lists()) raw.emplace_back(l.values().begin(), l.values().end());
    const auto agg = model.aggregate_weights();
    const std::vector<double> agg_w(agg.values().begin(), agg.values().end());
    const auto ref = oracle::mallows(raw, agg_w, model.gain.increments(n)).expectations();
    for (std::size_t i = 0; i < k2; ++i) {
      // Unit-level term: Phi1(sum_j W1(i,j) E[d_j]) + lambda1/2 ||W1(i,.)||^2.
      const auto unit = [&](const std::vector<double>& row) {
        double s = 0.0, sq = 0.0;
        for (std::size_t j = 0; j < k1; ++j) {
          s += row[j] * ref[j];
          sq += row[j] * row[j];
        }
        return phi(p1, s) + 0.5 * 0.02 * sq;
      };
      const std::vector<double> row(model.W1[i].values().begin(), model.W1[i].values().end());
      for (std::size_t j = 0; j < k1; ++j) {
        CHECK(oracle::relative_error(g1[i][j], oracle::central_difference(unit, row, j)) < 1e-4);
      }
    }

    const double delta2 = output_preactivation(model, delta1);
    const auto g2 = top_gradient(model, delta2, delta1);
    const auto top = [&](const std::vector<double>& w2) {
      double s = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < k2; ++i) {
        double pre = 0.0;
        for (std::size_t j = 0; j < k1; ++j) pre += model.W1[i][j] * ref[j];
        s += w2[i] * phi(p1, pre);
        sq += w2[i] * w2[i];
      }
      return phi(p2, s) + 0.5 * 0.02 * sq;
    };
    const std::vector<double> w2(model.W2.values().begin(), model.W2.values().end());
    for (std::size_t i = 0; i < k2; ++i) {
      CHECK(oracle::relative_error(g2[i], oracle::central_difference(top, w2, i)) < 1e-4);
    }
  }
}

TEST_CASE("initialization") {
  NestedHyper hyper;
  const auto m = init_nested(3, 5, ConcaveGain::logistic(), Activation::logistic,
                             Activation::logistic, hyper, 9);
  CHECK(m.k1() == 3);
  CHECK(m.k2() == 5);
  CHECK_FALSE(m.W1[0] == m.W1[1]);
  for (const auto& row : m.W1) {
    for (double v : row.values()) CHECK(std::abs(v - 1.0 / 3) < 0.01);
  }
  const auto single = init_nested(3, 1, ConcaveGain::logistic(), Activation::logistic,
                                  Activation::logistic, hyper, 9);
  CHECK(single.W1[0] == SimplexWeights::uniform(3));
  CHECK(default_hidden_units(2) == 10);
  CHECK(default_hidden_units(8) == 16);
  CHECK(default_hidden_units(46) == 64);
}

TEST_CASE("K2 = 1 with identity activations reproduces linear training") {
  std::mt19937_64 rng(13);
  std::vector<QueryInstance> data;
  for (int q = 0; q < 15; ++q) data.push_back(random_query(rng, 6, 3, "q" + std::to_string(q)));
  LinearHyper lh;
  lh.epochs = 5;
  lh.lambda = 0.03;
  NestedHyper nh;
  nh.epochs = 5;
  nh.lambda1 = nh.lambda2 = 0.03;
  TrainSettings s;
  s.seed = 5;
  const auto lin = train_linear(data, lh, ConcaveGain::logistic(), s);
  const auto nes = train_nested(data, 1, nh, ConcaveGain::logistic(), Activation::identity,
                                Activation::identity, s);
  REQUIRE(lin.log.snapshots.size() == nes.log.snapshots.size());
  for (std::size_t e = 0; e < lin.log.snapshots.size(); ++e) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(lin.log.snapshots[e][j] - nes.log.snapshots[e][j]) <= 1e-12);
    }
  }
}

TEST_CASE("one input list keeps every row at (1)") {
  std::mt19937_64 rng(4);
  std::vector<QueryInstance> data;
  for (int q = 0; q < 5; ++q) data.push_back(random_query(rng, 5, 1, "q" + std::to_string(q)));
  NestedHyper nh;
  nh.epochs = 3;
  const auto r = train_nested(data, 4, nh, ConcaveGain::logistic(), Activation::shifted_logistic,
                              Activation::shifted_logistic, TrainSettings{});
  for (const auto& row : r.model.W1) CHECK(row[0] == 1.0);
}

TEST_CASE("nested training on planted data favours the clean ranker") {
  SynthConfig cfg;
  cfg.num_queries = 100;
  cfg.seed = 8;
  const auto data = synth_planted(cfg);
  NestedHyper nh;
  const auto r = train_nested(data.queries, 10, nh, ConcaveGain::logistic(),
                              Activation::shifted_logistic, Activation::shifted_logistic,
                              TrainSettings{});
  const auto agg = r.model.aggregate_weights();
  const auto mass = agg.values();
  CHECK(std::max_element(mass.begin(), mass.end()) - mass.begin() == 0);
  for (const auto& row : r.model.W1) {
    double s = 0.0;
    for (double v : row.values()) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

TEST_CASE("nested training is independent of thread count") {
  std::mt19937_64 rng(14);
  std::vector<QueryInstance> data;
  for (int q = 0; q < 10; ++q) data.push_back(random_query(rng, 6, 3, "q" + std::to_string(q)));
  NestedHyper nh;
  nh.epochs = 3;
  nh.sampling = NestedSampling::per_unit;
  TrainSettings a;
  a.seed = 3;
  TrainSettings b = a;
  b.threads = 3;
  const auto ra = train_nested(data, 4, nh, ConcaveGain::logistic(), Activation::logistic,
                               Activation::logistic, a);
  const auto rb = train_nested(data, 4, nh, ConcaveGain::logistic(), Activation::logistic,
                               Activation::logistic, b);
  CHECK(ra.model.flatten() == rb.model.flatten());
  CHECK(ra.log.objective == rb.log.objective);
}

TEST_CASE("inference examples and argsort invariance") {
  std::mt19937_64 rng(15);
  const auto q = random_query(rng, 7, 3);
  const auto one_hot = make_model({{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}}, {0.3, 0.7});
  CHECK(infer(one_hot, q) == ranking_from_scores(q.list(1)));
  const auto uniform = make_model({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}, {0.5, 0.5});
  CHECK(infer(uniform, q) == baseline_average(q));

  const Activation kinds[] = {Activation::shifted_logistic, Activation::logistic, Activation::identity};
  for (int trial = 0; trial < 100; ++trial) {
    const auto qq = random_query(rng, 3 + trial % 4, 2 + trial % 3);
    const auto m = random_model(rng, qq.num_lists(), 1 + trial % 5, kinds[trial % 3],
                                kinds[(trial / 3) % 3], 0.01);
    CHECK(infer(m, qq) == ranking_from_scores(aggregate_scores(m, qq, false)));
  }
}
