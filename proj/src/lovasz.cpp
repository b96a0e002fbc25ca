#include "subrank/lovasz.hpp"

#include <algorithm>
#include <functional>

#include "subrank/error.hpp"

namespace subrank {

namespace {

void check_length(std::size_t x, std::size_t sigma) {
  if (x != sigma) {
    throw InvalidInput("score list has " + std::to_string(x) +
                       " candidates but ranking has " + std::to_string(sigma));
  }
}

}  // namespace

std::vector<double> chain_h_vector(const Ranking& sigma, const SetFunction& f) {
  const std::size_t n = sigma.size();
  std::vector<bool> members(n, false);
  std::vector<double> h(n);
  double prev = f(members);
  for (std::size_t i = 0; i < n; ++i) {
    members[sigma[i]] = true;
    const double cur = f(members);
    h[sigma[i]] = cur - prev;
    prev = cur;
  }
  return h;
}

std::vector<double> h_vector(const Ranking& sigma, const ConcaveGain& gain) {
  // For f(X) = g(|X|) the chain difference at step i is g(i) - g(i-1).
  const auto delta = gain.increments(sigma.size());
  std::vector<double> h(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) h[sigma[i]] = delta[i];
  return h;
}

double lovasz_extension(std::span<const double> x, std::span<const double> delta) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double z = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) z += sorted[i] * delta[i];
  return z;
}

double lovasz_extension(const ScoreList& x, const ConcaveGain& gain) {
  if (x.empty()) throw InvalidInput("empty ground set");
  return lovasz_extension(x.values(), gain.increments(x.size()));
}

double chain_inner_product(std::span<const double> x, const Ranking& sigma,
                           std::span<const double> delta) {
  double s = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) s += x[sigma[i]] * delta[i];
  return s;
}

double lb_divergence(const ScoreList& x, const Ranking& sigma,
                     const ConcaveGain& gain) {
  check_length(x.size(), sigma.size());
  const auto delta = gain.increments(x.size());
  const double d = lovasz_extension(x.values(), delta) -
                   chain_inner_product(x.values(), sigma, delta);
  // Rounding can leave -1 ulp when sigma sorts x.
  return std::max(d, 0.0);
}

double lb_bound(const ScoreList& x, const ConcaveGain& gain) {
  if (x.empty()) throw InvalidInput("empty ground set");
  const std::size_t n = x.size();
  const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
  const double eps = *hi - *lo;
  if (eps == 0.0) return 0.0;
  // g(1) - g(N) + g(N-1) = delta(1) - delta(N)
  const double spread = gain.increment(1) - gain.increment(n);
  return eps * static_cast<double>(n) * spread;
}

double ndcg_loss_from_divergence(double d, const ScoreList& x,
                                 const ConcaveGain& gain) {
  const double z = lovasz_extension(x, gain);
  if (!(z > 0.0)) throw InvalidInput("degenerate normalizer");
  return d / z;
}

}  // namespace subrank
