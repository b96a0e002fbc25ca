#include "subrank/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subrank/error.hpp"
#include "subrank/text.hpp"

namespace subrank {

ScoreList::ScoreList(std::vector<double> scores) : scores_(std::move(scores)) {
  for (std::size_t j = 0; j < scores_.size(); ++j) {
    if (!std::isfinite(scores_[j])) {
      throw InvalidInput("score " + std::to_string(j) + " is not finite");
    }
  }
}

Ranking::Ranking(std::vector<std::size_t> order) : order_(std::move(order)) {
  if (order_.empty()) throw InvalidInput("empty ground set");
  std::vector<bool> seen(order_.size(), false);
  for (std::size_t c : order_) {
    if (c >= order_.size() || seen[c]) {
      throw InvalidInput("ranking is not a permutation of 0..N-1");
    }
    seen[c] = true;
  }
}

Ranking Ranking::identity(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return Ranking(std::move(order));
}

std::vector<std::size_t> Ranking::positions() const {
  std::vector<std::size_t> pos(order_.size());
  for (std::size_t r = 0; r < order_.size(); ++r) pos[order_[r]] = r;
  return pos;
}

Ranking ranking_from_scores(std::span<const double> scores) {
  if (scores.empty()) throw InvalidInput("empty ground set");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return Ranking(std::move(order));
}

namespace {

// exp(i - 1) overflows to infinity past i = 710; stop well before the
// increments denormalize.
constexpr std::size_t kLogisticMaxSize = 700;
constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

}  // namespace

ConcaveGain ConcaveGain::logistic() {
  return ConcaveGain(Kind::logistic, kLogisticMaxSize, {});
}

ConcaveGain ConcaveGain::log2_discount() {
  return ConcaveGain(Kind::log2, kUnbounded, {});
}

ConcaveGain ConcaveGain::linear_decay(std::size_t length) {
  if (length == 0) throw InvalidInput("linear gain length must be positive");
  return ConcaveGain(Kind::linear, length, {});
}

ConcaveGain ConcaveGain::from_increments(std::vector<double> increments) {
  if (increments.empty()) throw InvalidInput("gain table is empty");
  for (std::size_t i = 0; i < increments.size(); ++i) {
    if (!std::isfinite(increments[i]) || increments[i] <= 0.0) {
      throw InvalidInput("gain increments must be positive and finite");
    }
    if (i > 0 && increments[i] > increments[i - 1]) {
      throw InvalidInput("gain increments must be non-increasing (concave g)");
    }
  }
  const std::size_t n = increments.size();
  return ConcaveGain(Kind::table, n, std::move(increments));
}

ConcaveGain ConcaveGain::parse(std::string_view spec) {
  spec = trim(spec);
  if (spec == "logistic") return logistic();
  if (spec == "log2") return log2_discount();
  if (spec.starts_with("linear:")) {
    return linear_decay(parse_size(spec.substr(7), "linear gain length"));
  }
  if (spec.starts_with("table:")) {
    std::vector<double> values;
    for (std::string_view field : split(spec.substr(6), ',')) {
      values.push_back(parse_double(field, "gain increment"));
    }
    return from_increments(std::move(values));
  }
  throw InvalidInput("unknown gain spec '" + std::string(spec) + "'");
}

std::string ConcaveGain::spec() const {
  switch (kind_) {
    case Kind::logistic: return "logistic";
    case Kind::log2: return "log2";
    case Kind::linear: return "linear:" + std::to_string(max_size_);
    case Kind::table: {
      std::string out = "table:";
      for (std::size_t i = 0; i < table_.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(table_[i]);
      }
      return out;
    }
  }
  return {};
}

double ConcaveGain::increment(std::size_t i) const {
  if (i == 0 || i > max_size_) {
    throw InvalidInput("gain undefined at " + std::to_string(i) +
                       " (defined for 1.." + std::to_string(max_size_) + ")");
  }
  switch (kind_) {
    case Kind::logistic: return 1.0 / (1.0 + std::exp(static_cast<double>(i - 1)));
    case Kind::log2: return 1.0 / std::log2(static_cast<double>(i) + 1.0);
    case Kind::linear:
      return static_cast<double>(max_size_ - i + 1) /
             static_cast<double>(max_size_);
    case Kind::table: return table_[i - 1];
  }
  return 0.0;
}

double ConcaveGain::value(std::size_t i) const {
  double g = 0.0;
  for (std::size_t k = 1; k <= i; ++k) g += increment(k);
  return g;
}

std::vector<double> ConcaveGain::increments(std::size_t n) const {
  if (!covers(n)) {
    throw InvalidInput("gain covers " + std::to_string(max_size_) +
                       " candidates but " + std::to_string(n) +
                       " were requested");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = increment(i + 1);
  return out;
}

SimplexWeights::SimplexWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw InvalidInput("simplex weights are empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("simplex weights must be finite and non-negative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw InvalidInput("simplex weights sum to " + format_double(sum));
  }
}

SimplexWeights SimplexWeights::uniform(std::size_t k) {
  if (k == 0) throw InvalidInput("simplex weights are empty");
  return SimplexWeights(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

SimplexWeights SimplexWeights::one_hot(std::size_t k, std::size_t hot) {
  if (hot >= k) throw InvalidInput("one-hot index out of range");
  std::vector<double> w(k, 0.0);
  w[hot] = 1.0;
  return SimplexWeights(std::move(w));
}

QueryInstance::QueryInstance(std::string query_id, std::vector<ScoreList> lists,
                             std::optional<std::vector<double>> relevance)
    : id_(std::move(query_id)),
      lists_(std::move(lists)),
      relevance_(std::move(relevance)) {
  if (lists_.empty()) {
    throw InvalidInput("query '" + id_ + "' has no score lists");
  }
  const std::size_t n = lists_.front().size();
  if (n == 0) throw InvalidInput("query '" + id_ + "': empty ground set");
  for (const auto& l : lists_) {
    if (l.size() != n) {
      throw InvalidInput("query '" + id_ + "': score lists differ in length");
    }
  }
  if (relevance_) {
    if (relevance_->size() != n) {
      throw InvalidInput("query '" + id_ + "': relevance length mismatch");
    }
    for (double r : *relevance_) {
      if (!std::isfinite(r) || r < 0.0) {
        throw InvalidInput("query '" + id_ + "': relevance must be >= 0");
      }
    }
  }
}

std::vector<double> weighted_scores(const QueryInstance& q,
                                    std::span<const double> weights) {
  if (weights.size() != q.num_lists()) {
    throw InvalidInput("weight count " + std::to_string(weights.size()) +
                       " does not match K=" + std::to_string(q.num_lists()));
  }
  std::vector<double> out(q.num_candidates(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const auto x = q.list(i).values();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += weights[i] * x[j];
  }
  return out;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t chain_seed(std::uint64_t seed, std::string_view query_id,
                         std::uint64_t stream) noexcept {
  return (seed ^ fnv1a(query_id)) + stream * 0x9e3779b97f4a7c15ULL;
}

}  // namespace subrank
