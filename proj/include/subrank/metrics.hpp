#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "subrank/core.hpp"

namespace subrank {

/// Graded relevance r(0..N-1) >= 0. The ideal order sorts r descending.
class RelevanceJudgments {
 public:
  explicit RelevanceJudgments(std::vector<double> r);

  std::size_t size() const noexcept { return r_.size(); }
  double operator[](std::size_t j) const { return r_[j]; }
  std::span<const double> values() const noexcept { return r_; }
  Ranking ideal_order() const { return ranking_from_scores(r_); }

 private:
  std::vector<double> r_;
};

/// NDCG@k = (1/Z_k) sum_{i<=k} r(sigma(i)) D(i) with D(i) = discount.increment(i)
/// and Z_k the same sum over the ideal order. Throws when k is 0 or exceeds
/// N, or when Z_k = 0 ("no relevant candidates").
double ndcg_at_k(const Ranking& sigma, const RelevanceJudgments& rel,
                 std::size_t k, const ConcaveGain& discount);

/// 1 - NDCG@N.
double ndcg_loss(const Ranking& sigma, const RelevanceJudgments& rel,
                 const ConcaveGain& discount);

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs ordered correctly, ties counting one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Fraction of instances whose predicted top candidate differs from truth.
double error_rate(std::span<const std::size_t> predicted,
                  std::span<const std::size_t> truth);

/// Ranks by the plain mean of the lists (uniform-weight aggregation).
Ranking baseline_average(const QueryInstance& q);

/// Borda count: each list awards N - 1 - r points to its rank-r candidate.
Ranking baseline_borda(const QueryInstance& q);
std::vector<double> borda_points(const QueryInstance& q);

}  // namespace subrank
