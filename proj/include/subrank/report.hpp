#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "subrank/core.hpp"
#include "subrank/io.hpp"

namespace subrank {

/// Rankings one method produced, aligned with Dataset::queries.
struct MethodRankings {
  std::string method;
  std::vector<Ranking> rankings;
};

struct MethodNdcg {
  std::string method;
  /// ndcg[q][k-1] for every evaluated query.
  std::vector<std::vector<double>> ndcg;
  std::vector<double> mean;
};

/// NDCG@1..k_max per method. Queries with fewer than k candidates use
/// NDCG@N for the larger cut-offs. Queries without any relevant candidate
/// are skipped and counted.
struct NdcgReport {
  std::size_t k_max = 0;
  std::vector<std::string> query_ids;
  std::vector<MethodNdcg> methods;
  std::size_t skipped_queries = 0;
};

/// Throws InvalidInput when a query carries no relevance.
NdcgReport evaluate_ndcg(const Dataset& data,
                         const std::vector<MethodRankings>& methods,
                         std::size_t k_max, const ConcaveGain& discount);

/// method,query_id,ndcg@1,...,ndcg@k with a MEAN row per method.
void write_report_csv(const NdcgReport& report, std::ostream& out);
/// Aligned table: one row per method, columns Top-1..Top-k of mean NDCG.
void write_report_table(const NdcgReport& report, std::ostream& out);

}  // namespace subrank
