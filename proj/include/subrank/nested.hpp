#pragma once

// Nested-structured aggregation: a hidden layer of K2 units, each a simplex
// mixture (row of W1) over the K1 input lists, combined by a simplex mixture
// W2 through increasing concave activations:
//
//   J = (1/|Q|) sum_q Phi2( sum_i W2(i) Phi1( E_pi[ sum_j W1(i,j) d(x_j||pi) ] ) )
//       + (lambda1/2) ||W1||_F^2 + (lambda2/2) ||W2||^2
//
// Training is feed-forward per query: the bottom layer is updated first
// (hidden pre-activations, bottom gradient, W1 step), then the top layer from
// the refreshed hidden values (output pre-activation, top gradient, W2 step).
// Both steps are exponentiated updates exp(-mu grad).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "subrank/core.hpp"
#include "subrank/linear.hpp"
#include "subrank/sampler.hpp"

namespace subrank {

enum class Activation {
  /// 2 (logistic(t) - 1/2): increasing, concave for t >= 0, zero at zero.
  shifted_logistic,
  logistic,
  /// Linearization used to reduce the nested model to the linear one.
  identity,
};

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a) noexcept;
double activate(Activation a, double t) noexcept;
double activate_derivative(Activation a, double t) noexcept;

/// How the expectations behind hidden unit i are estimated.
enum class NestedSampling {
  /// One sample set per query, drawn under the aggregate input weights
  /// sum_i W2(i) W1(i, .), shared by every hidden unit.
  shared_aggregate,
  /// One chain per hidden unit, drawn under that unit's row of W1.
  per_unit,
};

NestedSampling parse_nested_sampling(std::string_view name);
std::string_view to_string(NestedSampling s) noexcept;

struct NestedHyper {
  double lambda1 = 0.01;
  double lambda2 = 0.01;
  double mu = 0.1;
  std::size_t epochs = 20;
  double tolerance = 1e-5;
  /// Relative jitter applied to the uniform initialization when K2 > 1.
  double jitter = 0.01;
  bool shuffle = false;
  NestedSampling sampling = NestedSampling::shared_aggregate;

  void validate() const;
};

using Matrix = std::vector<std::vector<double>>;

struct NestedModel {
  std::vector<SimplexWeights> W1;  // K2 rows of length K1
  SimplexWeights W2;               // length K2
  ConcaveGain gain = ConcaveGain::logistic();
  Activation phi1 = Activation::shifted_logistic;
  Activation phi2 = Activation::shifted_logistic;
  NestedHyper hyper;

  std::size_t k1() const noexcept { return W1.front().size(); }
  std::size_t k2() const noexcept { return W2.size(); }

  /// sum_i W2(i) W1(i, .), a point on the K1 simplex.
  SimplexWeights aggregate_weights() const;
  /// W1 row-major followed by W2.
  std::vector<double> flatten() const;
};

/// max(10, 2 K1) capped at 64.
std::size_t default_hidden_units(std::size_t k1) noexcept;

/// Uniform rows plus seeded relative jitter (only when k2 > 1), renormalized.
NestedModel init_nested(std::size_t k1, std::size_t k2, const ConcaveGain& gain,
                        Activation phi1, Activation phi2,
                        const NestedHyper& hyper, std::uint64_t seed);

/// E[d(x_j || pi)] as seen by each hidden unit: a K2 x K1 table. Rows are
/// identical under shared_aggregate sampling.
Matrix unit_expectations(const NestedModel& model, const QueryInstance& q,
                         const ExpectationSettings& settings, std::uint64_t seed);
/// Shared-sample variant on a frozen sample set.
Matrix unit_expectations(const NestedModel& model, const QueryInstance& q,
                         const SampleSet& samples);

/// delta1(i) = sum_j W1(i,j) E_i[d_j].
std::vector<double> hidden_preactivation(const NestedModel& model,
                                         const Matrix& expectations);

/// grad1(i,j) = Phi1'(delta1(i)) E_i[d_j] + lambda1 W1(i,j).
Matrix bottom_gradient(const NestedModel& model, const Matrix& expectations,
                       std::span<const double> delta1);

NestedModel update_W1(const NestedModel& model, const Matrix& grad1);

/// delta2 = sum_i W2(i) Phi1(delta1(i)).
double output_preactivation(const NestedModel& model,
                            std::span<const double> delta1);

/// grad2(i) = Phi2'(delta2) Phi1(delta1(i)) + lambda2 W2(i).
std::vector<double> top_gradient(const NestedModel& model, double delta2,
                                 std::span<const double> delta1);

NestedModel update_W2(const NestedModel& model, std::span<const double> grad2);

/// Full feed-forward update for one query given its expectation table.
NestedModel train_step(const NestedModel& model, const Matrix& expectations);

/// Sampled objective J; regularizers included.
double nested_objective(const NestedModel& model,
                        std::span<const QueryInstance> data,
                        const TrainSettings& settings, std::uint64_t stream = 0);

struct NestedTrainingResult {
  NestedModel model;
  TrainingLog log;
};

NestedTrainingResult train_nested(std::span<const QueryInstance> data,
                                  std::size_t k2, const NestedHyper& hyper,
                                  const ConcaveGain& gain, Activation phi1,
                                  Activation phi2, const TrainSettings& settings);

/// Phi2(sum_i W2(i) Phi1(sum_j W1(i,j) x_j)); without the outer Phi2 when
/// apply_outer is false.
std::vector<double> aggregate_scores(const NestedModel& model,
                                     const QueryInstance& q,
                                     bool apply_outer = true);
Ranking infer(const NestedModel& model, const QueryInstance& q);

}  // namespace subrank
