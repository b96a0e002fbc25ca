#include "subrank/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "subrank/error.hpp"
#include "subrank/lovasz.hpp"
#include "random.hpp"

namespace subrank {

AcceptanceRule parse_acceptance_rule(std::string_view name) {
  if (name == "standard_metropolis" || name == "standard") {
    return AcceptanceRule::standard_metropolis;
  }
  if (name == "paper_literal" || name == "literal") {
    return AcceptanceRule::paper_literal;
  }
  throw InvalidInput("unknown acceptance rule '" + std::string(name) + "'");
}

std::string_view to_string(AcceptanceRule rule) noexcept {
  switch (rule) {
    case AcceptanceRule::standard_metropolis: return "standard_metropolis";
    case AcceptanceRule::paper_literal: return "paper_literal";
  }
  return "";
}

void ChainConfig::validate() const {
  if (num_samples < 1) throw InvalidInput("num_samples must be >= 1");
  if (thinning < 1) throw InvalidInput("thinning must be >= 1");
}

EnergyContext::EnergyContext(std::span<const ScoreList> lists,
                             SimplexWeights weights, const ConcaveGain& gain)
    : lists_(lists), weights_(std::move(weights)) {
  if (lists_.empty()) throw InvalidInput("energy needs at least one list");
  if (weights_.size() != lists_.size()) {
    throw InvalidInput("weight count " + std::to_string(weights_.size()) +
                       " does not match K=" + std::to_string(lists_.size()));
  }
  const std::size_t n = lists_.front().size();
  for (const auto& l : lists_) {
    if (l.size() != n) throw InvalidInput("score lists differ in length");
  }
  delta_ = gain.increments(n);
  extension_.reserve(lists_.size());
  for (const auto& l : lists_) {
    extension_.push_back(lovasz_extension(l.values(), delta_));
  }
}

double EnergyContext::divergence(std::size_t i, const Ranking& pi) const {
  if (pi.size() != num_candidates()) {
    throw InvalidInput("ranking has " + std::to_string(pi.size()) +
                       " candidates, lists have " +
                       std::to_string(num_candidates()));
  }
  const double d =
      extension_[i] - chain_inner_product(lists_[i].values(), pi, delta_);
  return std::max(d, 0.0);
}

double energy(const EnergyContext& ctx, const Ranking& pi) {
  double e = 0.0;
  for (std::size_t i = 0; i < ctx.num_lists(); ++i) {
    const double w = ctx.weights()[i];
    if (w != 0.0) e += w * ctx.divergence(i, pi);
  }
  return e;
}

double acceptance_ratio(const EnergyContext& ctx, const Ranking& current,
                        const Ranking& proposed) {
  return std::exp(energy(ctx, current) - energy(ctx, proposed));
}

namespace {

using detail::uniform_index;
using detail::uniform_unit;

// Incremental chain state. `inner[i]` tracks sum_r x_i(order[r]) delta(r) so
// a transposition costs O(K).
class Chain {
 public:
  Chain(const EnergyContext& ctx, std::vector<std::size_t> start)
      : ctx_(ctx), order_(std::move(start)), inner_(ctx.num_lists()),
        step_(ctx.num_lists()) {
    resync();
  }

  // One proposal; returns true when accepted.
  bool step(std::mt19937_64& rng, AcceptanceRule rule) {
    const std::size_t n = order_.size();
    if (n < 2) return false;
    const std::size_t a = uniform_index(rng, n);
    std::size_t b = uniform_index(rng, n - 1);
    if (b >= a) ++b;
    const auto delta = ctx_.delta();
    const double ddelta = delta[a] - delta[b];
    double de = 0.0;
    for (std::size_t i = 0; i < inner_.size(); ++i) {
      const auto x = ctx_.lists()[i].values();
      step_[i] = (x[order_[b]] - x[order_[a]]) * ddelta;
      de -= ctx_.weights()[i] * step_[i];
    }
    const double alpha = std::exp(-de);
    const double u = uniform_unit(rng);
    bool accept = false;
    switch (rule) {
      case AcceptanceRule::standard_metropolis: accept = u < alpha; break;
      case AcceptanceRule::paper_literal: accept = alpha > 0.9 && u < 0.9; break;
    }
    if (accept) {
      std::swap(order_[a], order_[b]);
      for (std::size_t i = 0; i < inner_.size(); ++i) inner_[i] += step_[i];
      if (++since_resync_ == kResyncInterval) resync();
    }
    return accept;
  }

  const std::vector<std::size_t>& order() const noexcept { return order_; }

 private:
  static constexpr std::size_t kResyncInterval = 4096;

  void resync() {
    const auto delta = ctx_.delta();
    for (std::size_t i = 0; i < inner_.size(); ++i) {
      const auto x = ctx_.lists()[i].values();
      double s = 0.0;
      for (std::size_t r = 0; r < order_.size(); ++r) s += x[order_[r]] * delta[r];
      inner_[i] = s;
    }
    since_resync_ = 0;
  }

  const EnergyContext& ctx_;
  std::vector<std::size_t> order_;
  std::vector<double> inner_;
  std::vector<double> step_;
  std::size_t since_resync_ = 0;
};

std::vector<std::size_t> start_state(const EnergyContext& ctx) {
  const std::size_t n = ctx.num_candidates();
  std::vector<double> mean(n, 0.0);
  for (std::size_t i = 0; i < ctx.num_lists(); ++i) {
    const double w = ctx.weights()[i];
    const auto x = ctx.lists()[i].values();
    for (std::size_t j = 0; j < n; ++j) mean[j] += w * x[j];
  }
  const auto r = ranking_from_scores(mean);
  return {r.order().begin(), r.order().end()};
}

}  // namespace

SampleSet draw_samples(const EnergyContext& ctx, const ChainConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  Chain chain(ctx, start_state(ctx));
  for (std::size_t t = 0; t < cfg.burn_in; ++t) chain.step(rng, cfg.acceptance_rule);

  SampleSet out;
  out.states.reserve(cfg.num_samples);
  for (std::size_t m = 0; m < cfg.num_samples; ++m) {
    for (std::size_t t = 0; t < cfg.thinning; ++t) {
      chain.step(rng, cfg.acceptance_rule);
    }
    out.states.emplace_back(chain.order());
  }
  out.weights.assign(cfg.num_samples, 1.0 / static_cast<double>(cfg.num_samples));
  return out;
}

SampleSet enumerate_distribution(const EnergyContext& ctx) {
  const std::size_t n = ctx.num_candidates();
  if (n > kMaxEnumerationSize) {
    throw InvalidInput("exact enumeration supports N <= " +
                       std::to_string(kMaxEnumerationSize) + ", got " +
                       std::to_string(n));
  }
  SampleSet out;
  std::vector<double> energies;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    out.states.emplace_back(order);
    energies.push_back(energy(ctx, out.states.back()));
  } while (std::next_permutation(order.begin(), order.end()));

  const double e_min = *std::min_element(energies.begin(), energies.end());
  double total = 0.0;
  out.weights.resize(energies.size());
  for (std::size_t s = 0; s < energies.size(); ++s) {
    out.weights[s] = std::exp(e_min - energies[s]);
    total += out.weights[s];
  }
  for (double& p : out.weights) p /= total;
  return out;
}

std::vector<double> expected_divergences(const EnergyContext& ctx,
                                         const SampleSet& samples) {
  std::vector<double> out(ctx.num_lists(), 0.0);
  for (std::size_t t = 0; t < samples.states.size(); ++t) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += samples.weights[t] * ctx.divergence(i, samples.states[t]);
    }
  }
  return out;
}

std::vector<double> sample_expectation(const EnergyContext& ctx,
                                       const ChainConfig& cfg) {
  return expected_divergences(ctx, draw_samples(ctx, cfg));
}

ExpectationBackend parse_backend(std::string_view name) {
  if (name == "metropolis" || name == "mh") return ExpectationBackend::metropolis;
  if (name == "exact" || name == "enumeration") return ExpectationBackend::exact;
  throw InvalidInput("unknown expectation backend '" + std::string(name) + "'");
}

SampleSet draw(const EnergyContext& ctx, const ExpectationSettings& settings,
               std::uint64_t seed) {
  switch (settings.backend) {
    case ExpectationBackend::exact: return enumerate_distribution(ctx);
    case ExpectationBackend::metropolis: {
      ChainConfig cfg = settings.chain;
      cfg.rng_seed = seed;
      return draw_samples(ctx, cfg);
    }
  }
  throw InvariantViolation("unhandled expectation backend");
}

}  // namespace subrank
