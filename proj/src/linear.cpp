#include "subrank/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "random.hpp"
#include "subrank/error.hpp"
#include "subrank/parallel.hpp"

namespace subrank {

void LinearHyper::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInput("mu must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidInput("lambda must be >= 0");
  }
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (!(tolerance >= 0.0)) throw InvalidInput("tolerance must be >= 0");
}

SimplexWeights exponentiated_update(const SimplexWeights& w,
                                    std::span<const double> grad, double mu) {
  const std::size_t k = w.size();
  if (grad.size() != k) {
    throw InvalidInput("gradient has " + std::to_string(grad.size()) +
                       " entries, weights have " + std::to_string(k));
  }
  // Shift by the largest exponent over the support; the shift cancels in the
  // ratio and keeps every exp() in (0, 1].
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(grad[i])) throw InvalidInput("gradient is not finite");
    if (w[i] > 0.0) shift = std::max(shift, -mu * grad[i]);
  }
  std::vector<double> next(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (w[i] == 0.0) continue;
    next[i] = w[i] * std::exp(-mu * grad[i] - shift);
    total += next[i];
  }
  for (double& v : next) v /= total;
  return SimplexWeights(std::move(next));
}

namespace {

void check_dims(const LinearModel& model, const QueryInstance& q) {
  if (q.num_lists() != model.w.size()) {
    throw InvalidInput("query '" + q.id() + "' has K=" +
                       std::to_string(q.num_lists()) + " but model has K=" +
                       std::to_string(model.w.size()));
  }
}

double regularizer(std::span<const double> w, double lambda) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 0.5 * lambda * sq;
}

}  // namespace

double query_objective(const LinearModel& model, const QueryInstance& q,
                       const SampleSet& samples) {
  check_dims(model, q);
  const EnergyContext ctx(q.lists(), model.w, model.gain);
  const auto e = expected_divergences(ctx, samples);
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += model.w[i] * e[i];
  return s;
}

double objective(const LinearModel& model, std::span<const QueryInstance> data,
                 const TrainSettings& settings, std::uint64_t stream) {
  if (data.empty()) throw InvalidInput("empty dataset");
  std::vector<double> terms(data.size());
  parallel_for(data.size(), settings.threads, [&](std::size_t qi) {
    const auto& q = data[qi];
    check_dims(model, q);
    const EnergyContext ctx(q.lists(), model.w, model.gain);
    const auto samples = draw(ctx, settings.expectation,
                              chain_seed(settings.seed, q.id(), stream));
    terms[qi] = query_objective(model, q, samples);
  });
  double mean = 0.0;
  for (double t : terms) mean += t;
  mean /= static_cast<double>(data.size());
  return mean + regularizer(model.w.values(), model.hyper.lambda);
}

std::vector<double> sgd_gradient(const LinearModel& model, const QueryInstance& q,
                                 const SampleSet& samples) {
  check_dims(model, q);
  const EnergyContext ctx(q.lists(), model.w, model.gain);
  auto grad = expected_divergences(ctx, samples);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] += model.hyper.lambda * model.w[i];
  }
  return grad;
}

std::vector<double> sgd_gradient(const LinearModel& model, const QueryInstance& q,
                                 const ExpectationSettings& settings,
                                 std::uint64_t seed) {
  check_dims(model, q);
  const EnergyContext ctx(q.lists(), model.w, model.gain);
  return sgd_gradient(model, q, draw(ctx, settings, seed));
}

LinearModel update_weights(const LinearModel& model, std::span<const double> grad) {
  LinearModel next = model;
  next.w = exponentiated_update(model.w, grad, model.hyper.mu);
  return next;
}

LinearTrainingResult train_linear(std::span<const QueryInstance> data,
                                  const LinearHyper& hyper,
                                  const ConcaveGain& gain,
                                  const TrainSettings& settings) {
  hyper.validate();
  settings.expectation.chain.validate();
  if (data.empty()) throw InvalidInput("empty dataset");
  const std::size_t k = data.front().num_lists();
  for (const auto& q : data) {
    if (q.num_lists() != k) {
      throw InvalidInput("query '" + q.id() + "' has K=" +
                         std::to_string(q.num_lists()) + ", expected " +
                         std::to_string(k));
    }
  }

  LinearTrainingResult result{
      LinearModel{SimplexWeights::uniform(k), gain, hyper}, {}};
  LinearModel& model = result.model;
  TrainingLog& log = result.log;
  if (settings.record_objective) {
    log.objective.push_back(objective(model, data, settings, 0));
  }

  std::vector<std::size_t> visit(data.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    if (hyper.shuffle) {
      std::iota(visit.begin(), visit.end(), std::size_t{0});
      std::mt19937_64 rng(settings.seed ^ (0x5851f42d4c957f2dULL * (epoch + 1)));
      detail::shuffle(std::span(visit), rng);
    }
    const SimplexWeights start = model.w;
    for (std::size_t qi : visit) {
      const auto& q = data[qi];
      const auto grad =
          sgd_gradient(model, q, settings.expectation,
                       chain_seed(settings.seed, q.id(), train_stream(epoch)));
      model = update_weights(model, grad);
    }
    ++log.epochs_run;
    log.snapshots.emplace_back(model.w.values().begin(), model.w.values().end());
    if (settings.record_objective) {
      log.objective.push_back(
          objective(model, data, settings, objective_stream(epoch)));
    }
    double change = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      change = std::max(change, std::abs(model.w[i] - start[i]));
    }
    if (change < hyper.tolerance) {
      log.converged = true;
      break;
    }
  }
  return result;
}

std::vector<double> aggregate_scores(const LinearModel& model,
                                     const QueryInstance& q) {
  check_dims(model, q);
  return weighted_scores(q, model.w.values());
}

Ranking infer(const LinearModel& model, const QueryInstance& q) {
  return ranking_from_scores(aggregate_scores(model, q));
}

}  // namespace subrank
