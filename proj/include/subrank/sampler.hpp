#pragma once

// Metropolis-Hastings sampling of rankings pi from the Mallows-style
// distribution
//
//   P(pi) ∝ exp(-E(pi)),   E(pi) = sum_i w_i d(x_i || pi)
//
// used to estimate the expectations E_pi[d(x_i || pi)] that drive training.
// The normalizer is never formed; the chain only uses energy differences.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "subrank/core.hpp"

namespace subrank {

enum class AcceptanceRule {
  /// Accept with probability min(1, alpha).
  standard_metropolis,
  /// Accept with probability 0.9 when alpha > 0.9, otherwise stay.
  paper_literal,
};

AcceptanceRule parse_acceptance_rule(std::string_view name);
std::string_view to_string(AcceptanceRule rule) noexcept;

struct ChainConfig {
  std::size_t num_samples = 50;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  AcceptanceRule acceptance_rule = AcceptanceRule::standard_metropolis;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidInput unless num_samples >= 1 and thinning >= 1.
  void validate() const;
};

/// The lists of one query together with the weights that define the energy.
/// Holds a view of the lists; they must outlive the context.
class EnergyContext {
 public:
  EnergyContext(std::span<const ScoreList> lists, SimplexWeights weights,
                const ConcaveGain& gain);

  std::size_t num_lists() const noexcept { return lists_.size(); }
  std::size_t num_candidates() const noexcept { return delta_.size(); }
  std::span<const ScoreList> lists() const noexcept { return lists_; }
  const SimplexWeights& weights() const noexcept { return weights_; }
  /// delta(1..N) as a 0-based table.
  std::span<const double> delta() const noexcept { return delta_; }
  /// Lovasz extension of each list (the sigma_x term of the divergence).
  std::span<const double> extensions() const noexcept { return extension_; }

  /// d(x_i || pi).
  double divergence(std::size_t i, const Ranking& pi) const;

 private:
  std::span<const ScoreList> lists_;
  SimplexWeights weights_;
  std::vector<double> delta_;
  std::vector<double> extension_;
};

/// E(pi) = sum_i w_i d(x_i || pi).
double energy(const EnergyContext& ctx, const Ranking& pi);

/// alpha = exp(E(current) - E(proposed)).
double acceptance_ratio(const EnergyContext& ctx, const Ranking& current,
                        const Ranking& proposed);

/// A discrete approximation of the distribution over rankings. `weights`
/// sum to one: 1/M each for a chain, exact probabilities for enumeration.
struct SampleSet {
  std::vector<Ranking> states;
  std::vector<double> weights;
};

/// Runs the chain: start at the ranking of the weighted mean scores, propose
/// uniform random transpositions, discard burn_in steps, then keep every
/// thinning-th state until num_samples are collected. Rejected proposals
/// repeat the current state.
SampleSet draw_samples(const EnergyContext& ctx, const ChainConfig& cfg);

/// All N! rankings with their exact probabilities. N must be at most
/// kMaxEnumerationSize.
inline constexpr std::size_t kMaxEnumerationSize = 8;
SampleSet enumerate_distribution(const EnergyContext& ctx);

/// Per-list expectations sum_t weight_t * d(x_i || pi_t).
std::vector<double> expected_divergences(const EnergyContext& ctx,
                                         const SampleSet& samples);

/// Chain estimate of E_pi[d(x_i || pi)] for every list i.
std::vector<double> sample_expectation(const EnergyContext& ctx,
                                       const ChainConfig& cfg);

/// How the trainers estimate expectations over pi.
enum class ExpectationBackend { metropolis, exact };

ExpectationBackend parse_backend(std::string_view name);

struct ExpectationSettings {
  ExpectationBackend backend = ExpectationBackend::metropolis;
  ChainConfig chain;
};

/// Draws the sample set for one query. `seed` overrides chain.rng_seed so the
/// caller can derive per-query, per-step seeds.
SampleSet draw(const EnergyContext& ctx, const ExpectationSettings& settings,
               std::uint64_t seed);

}  // namespace subrank
