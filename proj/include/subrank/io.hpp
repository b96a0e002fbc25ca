#pragma once

// Dataset ingestion and preparation.
//
// LETOR / SVMLight ranking text, one candidate per line:
//
//   <relevance> qid:<id> 1:<v1> 2:<v2> ... K:<vK> [# comment]
//
// Each feature column becomes one score list; lines are grouped by qid in
// order of first appearance.
//
// Scores CSV, one candidate per row, RFC-4180 quoting:
//
//   query_id,candidate_id,ranker_0,...,ranker_{K-1}[,relevance]
//
// Candidates within a query are ordered by numeric candidate_id.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "subrank/core.hpp"

namespace subrank {

struct Dataset {
  std::vector<QueryInstance> queries;
  std::string provenance;

  std::size_t num_lists() const;
  /// Throws InvalidInput unless K is uniform and query ids are unique.
  void validate() const;
};

struct ParseOptions {
  /// Reject missing feature values / empty cells. When false they are filled
  /// with 0.0 and the fill count is appended to the provenance.
  bool strict = true;
  /// Min-max normalize every list after parsing.
  bool normalize = false;
};

Dataset parse_letor(std::istream& in, const ParseOptions& options = {},
                    const std::string& source = "<stream>");
Dataset parse_letor(const std::filesystem::path& path,
                    const ParseOptions& options = {});
/// Queries without relevance are written with relevance 0.
void write_letor(const Dataset& data, std::ostream& out);

Dataset parse_scores_csv(std::istream& in, const ParseOptions& options = {},
                         const std::string& source = "<stream>");
Dataset parse_scores_csv(const std::filesystem::path& path,
                         const ParseOptions& options = {});
/// The relevance column is written when every query carries relevance.
void write_scores_csv(const Dataset& data, std::ostream& out);

/// Dispatches on extension: ".csv" is a scores CSV, anything else LETOR.
Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& options = {});

/// Quotes a CSV field when it contains a separator, quote or line break.
std::string csv_escape(const std::string& field);

/// log(1 + a) - log(1 + b) elementwise, for non-negative a and b.
std::vector<double> pairwise_feature_transform(std::span<const double> xa,
                                               std::span<const double> xb);

/// Synthetic data with a planted ground truth. Each candidate gets a uniform
/// relevance grade in {0, ..., max_grade}; ranker i scores the candidate as
/// grade + noise_levels[i] * N(0, 1). A zero-noise ranker therefore sorts
/// exactly into the ideal order.
struct SynthConfig {
  std::size_t num_queries = 100;
  std::size_t num_candidates = 10;
  std::vector<double> noise_levels{0.0, 0.5, 1.0, 1.5, 2.0};
  int max_grade = 4;
  std::uint64_t seed = 0;
};

Dataset synth_planted(const SynthConfig& config);

/// Maps each list affinely onto [0, 1]; constant lists become all 0.5.
QueryInstance normalize_minmax(const QueryInstance& q);
Dataset normalize_minmax(const Dataset& data);

}  // namespace subrank
