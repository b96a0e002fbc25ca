#pragma once

// Domain types shared by every module. All types validate on construction
// and are immutable afterwards, so they can be shared across threads freely.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subrank {

/// A score-based permutation: one ranker's finite scores over N candidates.
class ScoreList {
 public:
  ScoreList() = default;
  explicit ScoreList(std::vector<double> scores);

  std::size_t size() const noexcept { return scores_.size(); }
  bool empty() const noexcept { return scores_.empty(); }
  double operator[](std::size_t j) const { return scores_[j]; }
  std::span<const double> values() const noexcept { return scores_; }

  friend bool operator==(const ScoreList&, const ScoreList&) = default;

 private:
  std::vector<double> scores_;
};

/// An order-based permutation. `order()[i]` is the candidate at rank i
/// (0-based).
class Ranking {
 public:
  explicit Ranking(std::vector<std::size_t> order);

  static Ranking identity(std::size_t n);

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t operator[](std::size_t rank) const { return order_[rank]; }
  std::span<const std::size_t> order() const noexcept { return order_; }

  /// Inverse permutation: `positions()[candidate]` is that candidate's rank.
  std::vector<std::size_t> positions() const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  std::vector<std::size_t> order_;
};

/// Sorts candidates by non-increasing score. Ties keep the lower index first.
Ranking ranking_from_scores(std::span<const double> scores);
inline Ranking ranking_from_scores(const ScoreList& x) {
  return ranking_from_scores(x.values());
}

/// The concave function g of the cardinality-based submodular function
/// f(X) = g(|X|), described by its increments delta(i) = g(i) - g(i-1),
/// i = 1, 2, ...  The increments are positive and non-increasing.
///
/// Parametric gains are unbounded in principle but are capped where the
/// increment would underflow to zero in double precision.
class ConcaveGain {
 public:
  enum class Kind { logistic, log2, linear, table };

  /// delta(i) = 1 / (1 + exp(i - 1)). The default.
  static ConcaveGain logistic();
  /// delta(i) = 1 / log2(i + 1), the classic NDCG discount.
  static ConcaveGain log2_discount();
  /// delta(i) = (length - i + 1) / length for i <= length.
  static ConcaveGain linear_decay(std::size_t length);
  static ConcaveGain from_increments(std::vector<double> increments);

  /// Accepts "logistic", "log2", "linear:<L>" or "table:<d1>,<d2>,...".
  static ConcaveGain parse(std::string_view spec);
  /// Inverse of parse(); table values use shortest round-trip formatting.
  std::string spec() const;

  Kind kind() const noexcept { return kind_; }

  /// Largest N this gain is defined for.
  std::size_t max_size() const noexcept { return max_size_; }
  bool covers(std::size_t n) const noexcept { return n <= max_size_; }

  /// delta(i), 1-based. Throws InvalidInput when i is 0 or beyond max_size().
  double increment(std::size_t i) const;
  /// g(i) with g(0) = 0.
  double value(std::size_t i) const;
  /// delta(1..n) as a 0-based table. Throws when the gain is shorter than n.
  std::vector<double> increments(std::size_t n) const;

  friend bool operator==(const ConcaveGain& a, const ConcaveGain& b) {
    return a.kind_ == b.kind_ && a.max_size_ == b.max_size_ &&
           a.table_ == b.table_;
  }

 private:
  ConcaveGain(Kind kind, std::size_t max_size, std::vector<double> table)
      : kind_(kind), max_size_(max_size), table_(std::move(table)) {}

  Kind kind_;
  std::size_t max_size_;
  std::vector<double> table_;  // only for Kind::table
};

/// Non-negative weights summing to one (within kSimplexTolerance).
class SimplexWeights {
 public:
  static constexpr double kSimplexTolerance = 1e-9;

  explicit SimplexWeights(std::vector<double> w);
  static SimplexWeights uniform(std::size_t k);
  static SimplexWeights one_hot(std::size_t k, std::size_t hot);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }

  friend bool operator==(const SimplexWeights&, const SimplexWeights&) = default;

 private:
  std::vector<double> w_;
};

/// One query: K aligned score lists over a shared ground set of N candidates,
/// plus optional graded relevance used only for evaluation.
class QueryInstance {
 public:
  QueryInstance(std::string query_id, std::vector<ScoreList> lists,
                std::optional<std::vector<double>> relevance = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  std::size_t num_lists() const noexcept { return lists_.size(); }
  std::size_t num_candidates() const noexcept { return lists_.front().size(); }
  const ScoreList& list(std::size_t i) const { return lists_[i]; }
  std::span<const ScoreList> lists() const noexcept { return lists_; }
  const std::optional<std::vector<double>>& relevance() const noexcept {
    return relevance_;
  }

  friend bool operator==(const QueryInstance&, const QueryInstance&) = default;

 private:
  std::string id_;
  std::vector<ScoreList> lists_;
  std::optional<std::vector<double>> relevance_;
};

/// Weighted sum of the query's lists: sum_i w_i x_i.
std::vector<double> weighted_scores(const QueryInstance& q,
                                    std::span<const double> weights);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view s) noexcept;

/// Seed for one Markov chain: (seed XOR fnv1a(query_id)), mixed with a
/// stream index so repeated draws for the same query differ.
std::uint64_t chain_seed(std::uint64_t seed, std::string_view query_id,
                         std::uint64_t stream = 0) noexcept;

}  // namespace subrank
