#include "subrank/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "random.hpp"
#include "subrank/error.hpp"
#include "subrank/text.hpp"

namespace subrank {

std::size_t Dataset::num_lists() const {
  if (queries.empty()) throw InvalidInput("empty dataset");
  return queries.front().num_lists();
}

void Dataset::validate() const {
  if (queries.empty()) throw InvalidInput("empty dataset");
  const std::size_t k = queries.front().num_lists();
  std::set<std::string> ids;
  for (const auto& q : queries) {
    if (q.num_lists() != k) {
      throw InvalidInput("query '" + q.id() + "' has K=" +
                         std::to_string(q.num_lists()) + ", expected " +
                         std::to_string(k));
    }
    if (!ids.insert(q.id()).second) {
      throw InvalidInput("duplicate query id '" + q.id() + "'");
    }
  }
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  return in;
}

// Candidate rows of one query while parsing: features[c][f].
struct PendingQuery {
  std::string id;
  std::vector<std::vector<std::optional<double>>> features;
  std::vector<double> relevance;
  bool has_relevance = true;
};

// Columns-to-lists transpose; fills missing values when allowed.
QueryInstance assemble(PendingQuery&& pq, std::size_t k, bool strict,
                       std::size_t& filled) {
  const std::size_t n = pq.features.size();
  std::vector<std::vector<double>> columns(k, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    auto& row = pq.features[c];
    for (std::size_t f = 0; f < k; ++f) {
      if (f < row.size() && row[f]) {
        columns[f][c] = *row[f];
      } else if (strict) {
        throw InvalidInput("query '" + pq.id + "': candidate " +
                           std::to_string(c) + " is missing feature " +
                           std::to_string(f + 1));
      } else {
        ++filled;
      }
    }
  }
  std::vector<ScoreList> lists;
  lists.reserve(k);
  for (auto& col : columns) lists.emplace_back(std::move(col));
  std::optional<std::vector<double>> rel;
  if (pq.has_relevance) rel = std::move(pq.relevance);
  return QueryInstance(std::move(pq.id), std::move(lists), std::move(rel));
}

Dataset finish(std::vector<PendingQuery>&& pending, std::size_t k, bool strict,
               const ParseOptions& options, std::string provenance) {
  if (pending.empty()) throw InvalidInput("no data in " + provenance);
  Dataset data;
  std::size_t filled = 0;
  data.queries.reserve(pending.size());
  for (auto& pq : pending) data.queries.push_back(assemble(std::move(pq), k, strict, filled));
  if (filled > 0) provenance += " [filled " + std::to_string(filled) + " missing values with 0]";
  data.provenance = std::move(provenance);
  data.validate();
  if (options.normalize) {
    data = normalize_minmax(data);
  }
  return data;
}

}  // namespace

Dataset parse_letor(std::istream& in, const ParseOptions& options,
                    const std::string& source) {
  std::vector<PendingQuery> pending;
  std::unordered_map<std::string, std::size_t> index_of;
  std::optional<std::size_t> strict_k;
  std::size_t max_feature = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < body.size()) {
      const auto start = body.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto end = std::min(body.find_first_of(" \t", start), body.size());
      tokens.push_back(body.substr(start, end - start));
      pos = end;
    }
    try {
      if (tokens.size() < 2) throw InvalidInput("expected '<relevance> qid:<id> ...'");
      const double rel = parse_double(tokens[0], "relevance");
      if (rel < 0.0) throw InvalidInput("relevance must be non-negative");
      if (!tokens[1].starts_with("qid:") || tokens[1].size() == 4) {
        throw InvalidInput("expected qid:<id>, got '" + std::string(tokens[1]) + "'");
      }
      const std::string qid(tokens[1].substr(4));

      std::vector<std::optional<double>> row;
      std::size_t prev_index = 0;
      for (std::size_t t = 2; t < tokens.size(); ++t) {
        const auto colon = tokens[t].find(':');
        if (colon == std::string_view::npos) {
          throw InvalidInput("expected <index>:<value>, got '" +
                             std::string(tokens[t]) + "'");
        }
        const std::size_t f = parse_size(tokens[t].substr(0, colon), "feature index");
        if (f == 0) throw InvalidInput("feature indices are 1-based");
        if (f <= prev_index) throw InvalidInput("feature indices must increase");
        prev_index = f;
        row.resize(f);
        row[f - 1] = parse_double(tokens[t].substr(colon + 1), "feature value");
      }
      if (row.empty()) throw InvalidInput("line has no features");
      if (options.strict) {
        for (std::size_t f = 0; f < row.size(); ++f) {
          if (!row[f]) throw InvalidInput("missing feature " + std::to_string(f + 1));
        }
        if (!strict_k) strict_k = row.size();
        if (row.size() != *strict_k) {
          throw InvalidInput("line has " + std::to_string(row.size()) +
                             " features, expected " + std::to_string(*strict_k));
        }
      }
      max_feature = std::max(max_feature, row.size());

      auto [it, inserted] = index_of.try_emplace(qid, pending.size());
      if (inserted) pending.push_back(PendingQuery{qid, {}, {}, true});
      auto& pq = pending[it->second];
      pq.features.push_back(std::move(row));
      pq.relevance.push_back(rel);
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return finish(std::move(pending), max_feature, options.strict, options,
                "letor:" + source);
}

Dataset parse_letor(const std::filesystem::path& path, const ParseOptions& options) {
  auto in = open_input(path);
  return parse_letor(in, options, path.string());
}

void write_letor(const Dataset& data, std::ostream& out) {
  for (const auto& q : data.queries) {
    for (std::size_t c = 0; c < q.num_candidates(); ++c) {
      out << (q.relevance() ? format_double((*q.relevance())[c]) : "0") << " qid:"
          << q.id();
      for (std::size_t f = 0; f < q.num_lists(); ++f) {
        out << ' ' << (f + 1) << ':' << format_double(q.list(f)[c]);
      }
      out << '\n';
    }
  }
}

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC-4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks. CRLF and LF both end a record.
std::vector<CsvRecord> read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
  std::vector<CsvRecord> records;
  CsvRecord rec;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  rec.line = 1;
  auto end_record = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
    rec = CsvRecord{};
    rec.line = line;
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started) throw ParseError("stray quote inside field", line);
        quoted = true;
        field_started = true;
        break;
      case ',':
        rec.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  if (!field.empty() || !rec.fields.empty()) end_record();
  return records;
}

}  // namespace

Dataset parse_scores_csv(std::istream& in, const ParseOptions& options,
                         const std::string& source) {
  const auto records = read_csv(in);
  if (records.empty()) throw ParseError("missing header", 0);
  const auto& header = records.front().fields;
  if (header.size() < 3 || trim(header[0]) != "query_id" ||
      trim(header[1]) != "candidate_id") {
    throw ParseError(
        "header must be query_id,candidate_id,ranker_0,...[,relevance]",
        records.front().line);
  }
  const bool has_relevance = trim(header.back()) == "relevance";
  const std::size_t k = header.size() - 2 - (has_relevance ? 1 : 0);
  if (k == 0) throw ParseError("no ranker columns", records.front().line);

  struct Row {
    std::size_t candidate;
    std::vector<std::optional<double>> scores;
    double relevance;
  };
  std::vector<std::pair<std::string, std::vector<Row>>> groups;
  std::unordered_map<std::string, std::size_t> index_of;
  std::set<std::pair<std::string, std::size_t>> seen;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    try {
      if (rec.fields.size() != header.size()) {
        throw InvalidInput("row has " + std::to_string(rec.fields.size()) +
                           " fields, header has " + std::to_string(header.size()));
      }
      std::string qid(trim(rec.fields[0]));
      if (qid.empty()) throw InvalidInput("empty query_id");
      Row row{parse_size(rec.fields[1], "candidate_id"), {}, 0.0};
      if (!seen.emplace(qid, row.candidate).second) {
        throw InvalidInput("duplicate row for query '" + qid + "' candidate " +
                           std::to_string(row.candidate));
      }
      for (std::size_t f = 0; f < k; ++f) {
        const auto& cell = rec.fields[2 + f];
        if (trim(cell).empty()) {
          if (options.strict) {
            throw InvalidInput("empty score for ranker " + std::to_string(f));
          }
          row.scores.emplace_back();
        } else {
          row.scores.emplace_back(parse_double(cell, "score"));
        }
      }
      if (has_relevance) {
        row.relevance = parse_double(rec.fields.back(), "relevance");
        if (row.relevance < 0.0) throw InvalidInput("relevance must be non-negative");
      }
      auto [it, inserted] = index_of.try_emplace(qid, groups.size());
      if (inserted) groups.emplace_back(qid, std::vector<Row>{});
      groups[it->second].second.push_back(std::move(row));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), rec.line);
    }
  }

  std::vector<PendingQuery> pending;
  pending.reserve(groups.size());
  for (auto& [qid, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.candidate < b.candidate;
    });
    PendingQuery pq{qid, {}, {}, has_relevance};
    for (auto& row : rows) {
      pq.features.push_back(std::move(row.scores));
      pq.relevance.push_back(row.relevance);
    }
    pending.push_back(std::move(pq));
  }
  return finish(std::move(pending), k, options.strict, options, "csv:" + source);
}

Dataset parse_scores_csv(const std::filesystem::path& path,
                         const ParseOptions& options) {
  auto in = open_input(path);
  return parse_scores_csv(in, options, path.string());
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_scores_csv(const Dataset& data, std::ostream& out) {
  const std::size_t k = data.num_lists();
  const bool with_relevance =
      std::all_of(data.queries.begin(), data.queries.end(),
                  [](const QueryInstance& q) { return q.relevance().has_value(); });
  out << "query_id,candidate_id";
  for (std::size_t f = 0; f < k; ++f) out << ",ranker_" << f;
  if (with_relevance) out << ",relevance";
  out << '\n';
  for (const auto& q : data.queries) {
    for (std::size_t c = 0; c < q.num_candidates(); ++c) {
      out << csv_escape(q.id()) << ',' << c;
      for (std::size_t f = 0; f < k; ++f) out << ',' << format_double(q.list(f)[c]);
      if (with_relevance) out << ',' << format_double((*q.relevance())[c]);
      out << '\n';
    }
  }
}

Dataset load_dataset(const std::filesystem::path& path, const ParseOptions& options) {
  if (path.extension() == ".csv") return parse_scores_csv(path, options);
  return parse_letor(path, options);
}

std::vector<double> pairwise_feature_transform(std::span<const double> xa,
                                               std::span<const double> xb) {
  if (xa.size() != xb.size()) throw InvalidInput("feature vectors differ in length");
  std::vector<double> out(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    if (!(xa[i] >= 0.0) || !(xb[i] >= 0.0) || !std::isfinite(xa[i]) ||
        !std::isfinite(xb[i])) {
      throw InvalidInput("pairwise features must be finite and non-negative");
    }
    out[i] = std::log1p(xa[i]) - std::log1p(xb[i]);
  }
  return out;
}

Dataset synth_planted(const SynthConfig& config) {
  if (config.num_queries == 0) throw InvalidInput("num_queries must be positive");
  if (config.num_candidates == 0) throw InvalidInput("num_candidates must be positive");
  if (config.noise_levels.empty()) throw InvalidInput("need at least one ranker");
  if (config.max_grade < 1) throw InvalidInput("max_grade must be >= 1");
  for (double s : config.noise_levels) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("noise levels must be >= 0");
  }
  std::mt19937_64 rng(config.seed);
  const std::size_t n = config.num_candidates;
  const std::size_t k = config.noise_levels.size();
  const std::size_t grades = static_cast<std::size_t>(config.max_grade) + 1;
  const std::size_t width = std::to_string(config.num_queries).size();

  Dataset data;
  data.queries.reserve(config.num_queries);
  for (std::size_t qi = 0; qi < config.num_queries; ++qi) {
    std::vector<double> rel(n);
    for (double& r : rel) r = static_cast<double>(detail::uniform_index(rng, grades));
    std::vector<ScoreList> lists;
    lists.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> x(n);
      for (std::size_t c = 0; c < n; ++c) {
        x[c] = rel[c] + config.noise_levels[i] * detail::standard_normal(rng);
      }
      lists.emplace_back(std::move(x));
    }
    std::string id = std::to_string(qi + 1);
    id.insert(0, width - id.size(), '0');
    data.queries.emplace_back("q" + id, std::move(lists), std::move(rel));
  }
  std::ostringstream prov;
  prov << "synth:queries=" << config.num_queries << ",N=" << n << ",K=" << k
       << ",seed=" << config.seed;
  data.provenance = prov.str();
  return data;
}

QueryInstance normalize_minmax(const QueryInstance& q) {
  std::vector<ScoreList> lists;
  lists.reserve(q.num_lists());
  for (const auto& list : q.lists()) {
    const auto v = list.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(v.size());
    const double range = *hi - *lo;
    for (std::size_t j = 0; j < v.size(); ++j) {
      out[j] = range > 0.0 ? (v[j] - *lo) / range : 0.5;
    }
    lists.emplace_back(std::move(out));
  }
  return QueryInstance(q.id(), std::move(lists), q.relevance());
}

Dataset normalize_minmax(const Dataset& data) {
  Dataset out;
  out.provenance = data.provenance + " [minmax]";
  out.queries.reserve(data.queries.size());
  for (const auto& q : data.queries) out.queries.push_back(normalize_minmax(q));
  return out;
}

}  // namespace subrank
