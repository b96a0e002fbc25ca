#pragma once

// Lovasz-Bregman divergence between a score vector x and a ranking sigma for
// cardinality-based submodular functions f(X) = g(|X|):
//
//   d(x || sigma) = <x, h_{sigma_x} - h_sigma>
//                 = sum_i x(sigma_x(i)) delta(i) - sum_i x(sigma(i)) delta(i)
//
// where h_sigma(sigma(i)) = f(S_i) - f(S_{i-1}) along the chain of prefix sets
// of sigma and sigma_x sorts x in non-increasing order.

#include <functional>
#include <span>
#include <vector>

#include "subrank/core.hpp"

namespace subrank {

/// A set function evaluated on a membership mask over the ground set.
using SetFunction = std::function<double(const std::vector<bool>&)>;

/// Chain differences h(sigma(i)) = f(S_i) - f(S_{i-1}) for an arbitrary set
/// function. O(N) evaluations of f; intended for tests and new families of f.
std::vector<double> chain_h_vector(const Ranking& sigma, const SetFunction& f);

/// h-vector of f(X) = g(|X|): values[sigma(i)] = delta(i).
std::vector<double> h_vector(const Ranking& sigma, const ConcaveGain& gain);

/// Lovasz extension of f(X) = g(|X|) at x: sum_i x(sigma_x(i)) delta(i).
/// Also the normalizer Z of the divergence-based NDCG loss.
double lovasz_extension(std::span<const double> x, std::span<const double> delta);
double lovasz_extension(const ScoreList& x, const ConcaveGain& gain);

/// sum_i x(sigma(i)) delta(i), i.e. <x, h_sigma>.
double chain_inner_product(std::span<const double> x, const Ranking& sigma,
                           std::span<const double> delta);

double lb_divergence(const ScoreList& x, const Ranking& sigma,
                     const ConcaveGain& gain);

/// Permutation-independent upper bound on lb_divergence:
/// eps * N * (g(1) - g(N) + g(N-1)) with eps = max_ij |x_i - x_j|.
double lb_bound(const ScoreList& x, const ConcaveGain& gain);

/// d / Z with Z = lovasz_extension(x). Equals the NDCG loss of sigma when the
/// relevance is x and the discount is delta. Throws when Z <= 0.
double ndcg_loss_from_divergence(double d, const ScoreList& x,
                                 const ConcaveGain& gain);

}  // namespace subrank
