#include "subrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subrank/error.hpp"

namespace subrank {

RelevanceJudgments::RelevanceJudgments(std::vector<double> r) : r_(std::move(r)) {
  if (r_.empty()) throw InvalidInput("empty ground set");
  for (double v : r_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("relevance must be finite and non-negative");
    }
  }
}

double ndcg_at_k(const Ranking& sigma, const RelevanceJudgments& rel,
                 std::size_t k, const ConcaveGain& discount) {
  if (sigma.size() != rel.size()) {
    throw InvalidInput("ranking and relevance differ in length");
  }
  if (k == 0 || k > sigma.size()) {
    throw InvalidInput("k=" + std::to_string(k) + " outside 1.." +
                       std::to_string(sigma.size()));
  }
  const auto d = discount.increments(k);
  const auto ideal = rel.ideal_order();
  double gain = 0.0;
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    gain += rel[sigma[i]] * d[i];
    z += rel[ideal[i]] * d[i];
  }
  if (!(z > 0.0)) throw InvalidInput("no relevant candidates");
  // Guard the ideal-order case against 1 + ulp.
  return std::min(gain / z, 1.0);
}

double ndcg_loss(const Ranking& sigma, const RelevanceJudgments& rel,
                 const ConcaveGain& discount) {
  return 1.0 - ndcg_at_k(sigma, rel, sigma.size(), discount);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("scores and labels differ in length");
  }
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidInput("labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw InvalidInput("roc_auc needs both positive and negative labels");
  }
  // Rank-sum form with midranks for ties.
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start;
    while (end < idx.size() && scores[idx[end]] == scores[idx[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + end + 1);
    for (std::size_t t = start; t < end; ++t) {
      if (labels[idx[t]] == 1) pos_rank_sum += midrank;
    }
    start = end;
  }
  const double p = static_cast<double>(pos);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double error_rate(std::span<const std::size_t> predicted,
                  std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidInput("prediction and truth differ in length");
  }
  if (predicted.empty()) throw InvalidInput("no instances");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] != truth[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

Ranking baseline_average(const QueryInstance& q) {
  return ranking_from_scores(
      weighted_scores(q, SimplexWeights::uniform(q.num_lists()).values()));
}

std::vector<double> borda_points(const QueryInstance& q) {
  const std::size_t n = q.num_candidates();
  std::vector<double> points(n, 0.0);
  for (const auto& list : q.lists()) {
    const auto order = ranking_from_scores(list);
    for (std::size_t r = 0; r < n; ++r) {
      points[order[r]] += static_cast<double>(n - 1 - r);
    }
  }
  return points;
}

Ranking baseline_borda(const QueryInstance& q) {
  return ranking_from_scores(borda_points(q));
}

}  // namespace subrank
