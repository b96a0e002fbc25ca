#pragma once

// Linear-structured aggregation. Training minimizes
//
//   (1/|Q|) sum_q E_pi[ sum_i w_i d(x_i^q || pi^q) ] + (lambda/2) ||w||^2
//
// over the simplex with per-query stochastic gradients
// grad_i = E_pi[d(x_i^q || pi^q)] + lambda w_i and the exponentiated update
// w_i <- w_i exp(-mu grad_i) / sum_j w_j exp(-mu grad_j). Inference ranks
// candidates by the weighted score sum_i w_i x_i, which minimizes
// sum_i w_i d(x_i || pi) over all rankings.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "subrank/core.hpp"
#include "subrank/sampler.hpp"

namespace subrank {

struct LinearHyper {
  double lambda = 0.01;
  double mu = 0.1;
  std::size_t epochs = 20;
  /// Early stop once max_i |w_i(epoch end) - w_i(epoch start)| falls below.
  double tolerance = 1e-5;
  /// Visit queries in a seeded random order each epoch instead of file order.
  bool shuffle = false;

  void validate() const;
};

struct LinearModel {
  SimplexWeights w;
  ConcaveGain gain = ConcaveGain::logistic();
  LinearHyper hyper;
};

/// Settings shared by both trainers.
struct TrainSettings {
  ExpectationSettings expectation;
  std::uint64_t seed = 0;
  /// Evaluate the sampled objective before training and after every epoch.
  bool record_objective = true;
  /// Worker threads for objective evaluation. Weight updates are sequential.
  unsigned threads = 1;
};

struct TrainingLog {
  /// objective[0] is the initial value, objective[e] the value after epoch e.
  std::vector<double> objective;
  /// Flattened model weights after each epoch (w for linear; W1 then W2 for
  /// nested).
  std::vector<std::vector<double>> snapshots;
  std::size_t epochs_run = 0;
  bool converged = false;
};

/// Stream ids for chain_seed(): training draws in epoch e (0-based) use
/// train_stream(e); the objective recorded after epoch e uses
/// objective_stream(e). The initial objective uses stream 0.
constexpr std::uint64_t train_stream(std::size_t epoch) { return 2 * epoch + 1; }
constexpr std::uint64_t objective_stream(std::size_t epoch) { return 2 * epoch + 2; }

/// Exponentiated-gradient step on the simplex:
/// w_i <- w_i exp(-mu g_i) / sum_j w_j exp(-mu g_j). Zero entries stay zero.
SimplexWeights exponentiated_update(const SimplexWeights& w,
                                    std::span<const double> grad, double mu);

/// Sampled objective. Each query's sample set is drawn under model.w with
/// seed chain_seed(settings.seed, query id, stream).
double objective(const LinearModel& model, std::span<const QueryInstance> data,
                 const TrainSettings& settings, std::uint64_t stream = 0);

/// Per-query term sum_i w_i E[d_i] on a fixed sample set.
double query_objective(const LinearModel& model, const QueryInstance& q,
                       const SampleSet& samples);

/// grad_i = E[d(x_i || pi)] + lambda w_i on a fixed sample set.
std::vector<double> sgd_gradient(const LinearModel& model, const QueryInstance& q,
                                 const SampleSet& samples);
/// Draws the sample set under model.w and returns the gradient.
std::vector<double> sgd_gradient(const LinearModel& model, const QueryInstance& q,
                                 const ExpectationSettings& settings,
                                 std::uint64_t seed);

LinearModel update_weights(const LinearModel& model, std::span<const double> grad);

struct LinearTrainingResult {
  LinearModel model;
  TrainingLog log;
};

/// Uniform initialization, then per-query SGD passes over `data`.
LinearTrainingResult train_linear(std::span<const QueryInstance> data,
                                  const LinearHyper& hyper,
                                  const ConcaveGain& gain,
                                  const TrainSettings& settings);

/// sum_i w_i x_i.
std::vector<double> aggregate_scores(const LinearModel& model,
                                     const QueryInstance& q);
Ranking infer(const LinearModel& model, const QueryInstance& q);

}  // namespace subrank
