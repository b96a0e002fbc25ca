#include "subrank/report.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "subrank/error.hpp"
#include "subrank/metrics.hpp"
#include "subrank/text.hpp"

namespace subrank {

NdcgReport evaluate_ndcg(const Dataset& data,
                         const std::vector<MethodRankings>& methods,
                         std::size_t k_max, const ConcaveGain& discount) {
  if (k_max == 0) throw InvalidInput("k_max must be positive");
  NdcgReport report;
  report.k_max = k_max;
  for (const auto& m : methods) {
    if (m.rankings.size() != data.queries.size()) {
      throw InvalidInput("method '" + m.method + "' has " +
                         std::to_string(m.rankings.size()) + " rankings for " +
                         std::to_string(data.queries.size()) + " queries");
    }
    report.methods.push_back(MethodNdcg{m.method, {}, std::vector<double>(k_max, 0.0)});
  }
  for (std::size_t qi = 0; qi < data.queries.size(); ++qi) {
    const auto& q = data.queries[qi];
    if (!q.relevance()) {
      throw InvalidInput("query '" + q.id() + "' has no relevance judgments");
    }
    const RelevanceJudgments rel(*q.relevance());
    if (std::none_of(rel.values().begin(), rel.values().end(),
                     [](double r) { return r > 0.0; })) {
      ++report.skipped_queries;
      continue;
    }
    report.query_ids.push_back(q.id());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<double> row(k_max);
      for (std::size_t k = 1; k <= k_max; ++k) {
        row[k - 1] = ndcg_at_k(methods[mi].rankings[qi], rel,
                               std::min(k, q.num_candidates()), discount);
      }
      report.methods[mi].ndcg.push_back(std::move(row));
    }
  }
  const double count = static_cast<double>(report.query_ids.size());
  for (auto& m : report.methods) {
    for (const auto& row : m.ndcg) {
      for (std::size_t k = 0; k < k_max; ++k) m.mean[k] += row[k];
    }
    if (count > 0) {
      for (double& v : m.mean) v /= count;
    }
  }
  return report;
}

void write_report_csv(const NdcgReport& report, std::ostream& out) {
  out << "method,query_id";
  for (std::size_t k = 1; k <= report.k_max; ++k) out << ",ndcg@" << k;
  out << '\n';
  auto row = [&](const std::string& method, const std::string& id,
                 const std::vector<double>& values) {
    out << csv_escape(method) << ',' << csv_escape(id);
    for (double v : values) out << ',' << format_double(v);
    out << '\n';
  };
  for (const auto& m : report.methods) {
    for (std::size_t q = 0; q < m.ndcg.size(); ++q) row(m.method, report.query_ids[q], m.ndcg[q]);
    row(m.method, "MEAN", m.mean);
  }
}

void write_report_table(const NdcgReport& report, std::ostream& out) {
  std::size_t name_width = std::string("Methods").size();
  for (const auto& m : report.methods) name_width = std::max(name_width, m.method.size());
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(static_cast<int>(name_width)) << "Methods";
  for (std::size_t k = 1; k <= report.k_max; ++k) {
    out << "  " << std::right << std::setw(6) << ("Top-" + std::to_string(k));
  }
  out << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& m : report.methods) {
    out << std::left << std::setw(static_cast<int>(name_width)) << m.method;
    for (double v : m.mean) out << "  " << std::right << std::setw(6) << v;
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace subrank
