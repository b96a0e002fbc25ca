#include "subrank/nested.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "random.hpp"
#include "subrank/error.hpp"
#include "subrank/parallel.hpp"

namespace subrank {

Activation parse_activation(std::string_view name) {
  if (name == "shifted_logistic") return Activation::shifted_logistic;
  if (name == "logistic" || name == "sigmoid") return Activation::logistic;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::shifted_logistic: return "shifted_logistic";
    case Activation::logistic: return "logistic";
    case Activation::identity: return "identity";
  }
  return "";
}

namespace {

double logistic(double t) noexcept { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

double activate(Activation a, double t) noexcept {
  switch (a) {
    case Activation::shifted_logistic: return 2.0 * (logistic(t) - 0.5);
    case Activation::logistic: return logistic(t);
    case Activation::identity: return t;
  }
  return t;
}

double activate_derivative(Activation a, double t) noexcept {
  switch (a) {
    case Activation::shifted_logistic: {
      const double s = logistic(t);
      return 2.0 * s * (1.0 - s);
    }
    case Activation::logistic: {
      const double s = logistic(t);
      return s * (1.0 - s);
    }
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

NestedSampling parse_nested_sampling(std::string_view name) {
  if (name == "shared_aggregate" || name == "shared") {
    return NestedSampling::shared_aggregate;
  }
  if (name == "per_unit") return NestedSampling::per_unit;
  throw InvalidInput("unknown nested sampling mode '" + std::string(name) + "'");
}

std::string_view to_string(NestedSampling s) noexcept {
  switch (s) {
    case NestedSampling::shared_aggregate: return "shared_aggregate";
    case NestedSampling::per_unit: return "per_unit";
  }
  return "";
}

void NestedHyper::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("mu must be > 0");
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw InvalidInput("lambda1 must be >= 0");
  }
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
    throw InvalidInput("lambda2 must be >= 0");
  }
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (!(tolerance >= 0.0)) throw InvalidInput("tolerance must be >= 0");
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw InvalidInput("jitter must be in [0, 1)");
  }
}

SimplexWeights NestedModel::aggregate_weights() const {
  std::vector<double> agg(k1(), 0.0);
  for (std::size_t i = 0; i < k2(); ++i) {
    for (std::size_t j = 0; j < k1(); ++j) agg[j] += W2[i] * W1[i][j];
  }
  return SimplexWeights(std::move(agg));
}

std::vector<double> NestedModel::flatten() const {
  std::vector<double> out;
  out.reserve(k1() * k2() + k2());
  for (const auto& row : W1) out.insert(out.end(), row.values().begin(), row.values().end());
  out.insert(out.end(), W2.values().begin(), W2.values().end());
  return out;
}

std::size_t default_hidden_units(std::size_t k1) noexcept {
  return std::min<std::size_t>(std::max<std::size_t>(10, 2 * k1), 64);
}

namespace {

SimplexWeights jittered_uniform(std::size_t k, double jitter,
                                std::mt19937_64& rng) {
  std::vector<double> w(k);
  double total = 0.0;
  for (double& v : w) {
    v = 1.0 + jitter * (2.0 * detail::uniform_unit(rng) - 1.0);
    total += v;
  }
  for (double& v : w) v /= total;
  return SimplexWeights(std::move(w));
}

void check_dims(const NestedModel& model, const QueryInstance& q) {
  if (q.num_lists() != model.k1()) {
    throw InvalidInput("query '" + q.id() + "' has K=" +
                       std::to_string(q.num_lists()) + " but model has K1=" +
                       std::to_string(model.k1()));
  }
}

std::vector<double> row_weighted(const NestedModel& model,
                                 const Matrix& expectations) {
  std::vector<double> out(model.k2(), 0.0);
  for (std::size_t i = 0; i < model.k2(); ++i) {
    for (std::size_t j = 0; j < model.k1(); ++j) {
      out[i] += model.W1[i][j] * expectations[i][j];
    }
  }
  return out;
}

double frobenius_sq(const NestedModel& model) {
  double s = 0.0;
  for (const auto& row : model.W1) {
    for (double v : row.values()) s += v * v;
  }
  return s;
}

}  // namespace

NestedModel init_nested(std::size_t k1, std::size_t k2, const ConcaveGain& gain,
                        Activation phi1, Activation phi2,
                        const NestedHyper& hyper, std::uint64_t seed) {
  if (k1 == 0 || k2 == 0) throw InvalidInput("K1 and K2 must be positive");
  hyper.validate();
  std::vector<SimplexWeights> w1;
  w1.reserve(k2);
  if (k2 == 1) {
    // A single hidden unit has no symmetry to break.
    w1.push_back(SimplexWeights::uniform(k1));
    return NestedModel{std::move(w1), SimplexWeights::uniform(1), gain, phi1,
                       phi2, hyper};
  }
  std::mt19937_64 rng(detail::splitmix64(seed ^ 0x6a09e667f3bcc909ULL));
  for (std::size_t i = 0; i < k2; ++i) {
    w1.push_back(jittered_uniform(k1, hyper.jitter, rng));
  }
  auto w2 = jittered_uniform(k2, hyper.jitter, rng);
  return NestedModel{std::move(w1), std::move(w2), gain, phi1, phi2, hyper};
}

Matrix unit_expectations(const NestedModel& model, const QueryInstance& q,
                         const SampleSet& samples) {
  check_dims(model, q);
  const EnergyContext ctx(q.lists(), model.aggregate_weights(), model.gain);
  const auto e = expected_divergences(ctx, samples);
  return Matrix(model.k2(), e);
}

Matrix unit_expectations(const NestedModel& model, const QueryInstance& q,
                         const ExpectationSettings& settings, std::uint64_t seed) {
  check_dims(model, q);
  switch (model.hyper.sampling) {
    case NestedSampling::shared_aggregate: {
      const EnergyContext ctx(q.lists(), model.aggregate_weights(), model.gain);
      return Matrix(model.k2(), expected_divergences(ctx, draw(ctx, settings, seed)));
    }
    case NestedSampling::per_unit: {
      Matrix out;
      out.reserve(model.k2());
      for (std::size_t i = 0; i < model.k2(); ++i) {
        const EnergyContext ctx(q.lists(), model.W1[i], model.gain);
        out.push_back(expected_divergences(
            ctx, draw(ctx, settings, detail::splitmix64(seed ^ (i + 1)))));
      }
      return out;
    }
  }
  throw InvariantViolation("unhandled nested sampling mode");
}

std::vector<double> hidden_preactivation(const NestedModel& model,
                                         const Matrix& expectations) {
  return row_weighted(model, expectations);
}

Matrix bottom_gradient(const NestedModel& model, const Matrix& expectations,
                       std::span<const double> delta1) {
  Matrix grad(model.k2(), std::vector<double>(model.k1()));
  for (std::size_t i = 0; i < model.k2(); ++i) {
    const double slope = activate_derivative(model.phi1, delta1[i]);
    for (std::size_t j = 0; j < model.k1(); ++j) {
      grad[i][j] = slope * expectations[i][j] + model.hyper.lambda1 * model.W1[i][j];
    }
  }
  return grad;
}

NestedModel update_W1(const NestedModel& model, const Matrix& grad1) {
  if (grad1.size() != model.k2()) {
    throw InvalidInput("bottom gradient has wrong number of rows");
  }
  NestedModel next = model;
  for (std::size_t i = 0; i < model.k2(); ++i) {
    next.W1[i] = exponentiated_update(model.W1[i], grad1[i], model.hyper.mu);
  }
  return next;
}

double output_preactivation(const NestedModel& model,
                            std::span<const double> delta1) {
  if (delta1.size() != model.k2()) {
    throw InvalidInput("hidden activations have wrong length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < model.k2(); ++i) {
    s += model.W2[i] * activate(model.phi1, delta1[i]);
  }
  return s;
}

std::vector<double> top_gradient(const NestedModel& model, double delta2,
                                 std::span<const double> delta1) {
  if (delta1.size() != model.k2()) {
    throw InvalidInput("hidden activations have wrong length");
  }
  const double slope = activate_derivative(model.phi2, delta2);
  std::vector<double> grad(model.k2());
  for (std::size_t i = 0; i < model.k2(); ++i) {
    grad[i] = slope * activate(model.phi1, delta1[i]) +
              model.hyper.lambda2 * model.W2[i];
  }
  return grad;
}

NestedModel update_W2(const NestedModel& model, std::span<const double> grad2) {
  NestedModel next = model;
  next.W2 = exponentiated_update(model.W2, grad2, model.hyper.mu);
  return next;
}

NestedModel train_step(const NestedModel& model, const Matrix& expectations) {
  const auto delta1 = hidden_preactivation(model, expectations);
  NestedModel next = update_W1(model, bottom_gradient(model, expectations, delta1));
  // The top layer sees the hidden values recomputed with the new W1 on the
  // same sample set.
  const auto delta1_next = hidden_preactivation(next, expectations);
  const double delta2 = output_preactivation(next, delta1_next);
  return update_W2(next, top_gradient(next, delta2, delta1_next));
}

double nested_objective(const NestedModel& model,
                        std::span<const QueryInstance> data,
                        const TrainSettings& settings, std::uint64_t stream) {
  if (data.empty()) throw InvalidInput("empty dataset");
  std::vector<double> terms(data.size());
  parallel_for(data.size(), settings.threads, [&](std::size_t qi) {
    const auto& q = data[qi];
    const auto e = unit_expectations(model, q, settings.expectation,
                                     chain_seed(settings.seed, q.id(), stream));
    const auto delta1 = hidden_preactivation(model, e);
    terms[qi] = activate(model.phi2, output_preactivation(model, delta1));
  });
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= static_cast<double>(data.size());
  double w2sq = 0.0;
  for (double v : model.W2.values()) w2sq += v * v;
  return mean + 0.5 * model.hyper.lambda1 * frobenius_sq(model) +
         0.5 * model.hyper.lambda2 * w2sq;
}

NestedTrainingResult train_nested(std::span<const QueryInstance> data,
                                  std::size_t k2, const NestedHyper& hyper,
                                  const ConcaveGain& gain, Activation phi1,
                                  Activation phi2, const TrainSettings& settings) {
  hyper.validate();
  settings.expectation.chain.validate();
  if (data.empty()) throw InvalidInput("empty dataset");
  const std::size_t k1 = data.front().num_lists();
  for (const auto& q : data) {
    if (q.num_lists() != k1) {
      throw InvalidInput("query '" + q.id() + "' has K=" +
                         std::to_string(q.num_lists()) + ", expected " +
                         std::to_string(k1));
    }
  }

  NestedTrainingResult result{
      init_nested(k1, k2, gain, phi1, phi2, hyper, settings.seed), {}};
  NestedModel& model = result.model;
  TrainingLog& log = result.log;
  if (settings.record_objective) {
    log.objective.push_back(nested_objective(model, data, settings, 0));
  }

  std::vector<std::size_t> visit(data.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    if (hyper.shuffle) {
      std::iota(visit.begin(), visit.end(), std::size_t{0});
      std::mt19937_64 rng(settings.seed ^ (0x5851f42d4c957f2dULL * (epoch + 1)));
      detail::shuffle(std::span(visit), rng);
    }
    const auto start = model.flatten();
    for (std::size_t qi : visit) {
      const auto& q = data[qi];
      const auto e =
          unit_expectations(model, q, settings.expectation,
                            chain_seed(settings.seed, q.id(), train_stream(epoch)));
      model = train_step(model, e);
    }
    ++log.epochs_run;
    log.snapshots.push_back(model.flatten());
    if (settings.record_objective) {
      log.objective.push_back(
          nested_objective(model, data, settings, objective_stream(epoch)));
    }
    const auto& end = log.snapshots.back();
    double change = 0.0;
    for (std::size_t i = 0; i < end.size(); ++i) {
      change = std::max(change, std::abs(end[i] - start[i]));
    }
    if (change < hyper.tolerance) {
      log.converged = true;
      break;
    }
  }
  return result;
}

std::vector<double> aggregate_scores(const NestedModel& model,
                                     const QueryInstance& q, bool apply_outer) {
  check_dims(model, q);
  const std::size_t n = q.num_candidates();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < model.k2(); ++i) {
    const auto hidden = weighted_scores(q, model.W1[i].values());
    for (std::size_t c = 0; c < n; ++c) {
      out[c] += model.W2[i] * activate(model.phi1, hidden[c]);
    }
  }
  if (apply_outer) {
    for (double& v : out) v = activate(model.phi2, v);
  }
  return out;
}

Ranking infer(const NestedModel& model, const QueryInstance& q) {
  return ranking_from_scores(aggregate_scores(model, q));
}

}  // namespace subrank
