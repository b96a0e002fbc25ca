#include "subrank/model_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "subrank/error.hpp"
#include "subrank/text.hpp"

namespace subrank {

namespace {

constexpr std::string_view kMagic = "subrank-model";

void write_values(std::ostream& out, std::string_view key,
                  std::span<const double> values) {
  out << key;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

void write_header(std::ostream& out, std::string_view kind) {
  out << kMagic << '\n'
      << "format_version " << kModelFormatVersion << '\n'
      << "kind " << kind << '\n';
}

struct Entry {
  std::string value;
  std::size_t line;
};

std::vector<double> values_of(const Entry& e, std::size_t expected,
                              std::string_view key) {
  std::vector<double> out;
  std::istringstream in(e.value);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, key));
  if (out.size() != expected) {
    throw ParseError(std::string(key) + " has " + std::to_string(out.size()) +
                         " values, expected " + std::to_string(expected),
                     e.line);
  }
  return out;
}

}  // namespace

std::string serialize_model(const LinearModel& model) {
  std::ostringstream out;
  write_header(out, "linear");
  out << "K " << model.w.size() << '\n' << "gain " << model.gain.spec() << '\n';
  write_values(out, "w", model.w.values());
  return out.str();
}

std::string serialize_model(const NestedModel& model) {
  std::ostringstream out;
  write_header(out, "nested");
  out << "K1 " << model.k1() << '\n'
      << "K2 " << model.k2() << '\n'
      << "gain " << model.gain.spec() << '\n'
      << "phi1 " << to_string(model.phi1) << '\n'
      << "phi2 " << to_string(model.phi2) << '\n';
  std::vector<double> w1;
  for (const auto& row : model.W1) w1.insert(w1.end(), row.values().begin(), row.values().end());
  write_values(out, "W1", w1);
  write_values(out, "W2", model.W2.values());
  return out.str();
}

std::string serialize_model(const AnyModel& model) {
  return std::visit([](const auto& m) { return serialize_model(m); }, model);
}

AnyModel parse_model(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!saw_magic) {
      if (body != kMagic) throw ParseError("not a subrank model document", line_no);
      saw_magic = true;
      continue;
    }
    const auto space = body.find_first_of(" \t");
    const std::string key(body.substr(0, space));
    const std::string value(space == std::string_view::npos ? "" : trim(body.substr(space)));
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }
  }
  if (!saw_magic) throw ParseError("not a subrank model document", 0);

  auto get = [&](const std::string& key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ParseError("missing key '" + key + "'", 0);
    return it->second;
  };
  auto wrap = [](const Entry& e, auto&& fn) {
    try {
      return fn();
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidInput& ex) {
      throw ParseError(ex.what(), e.line);
    }
  };

  const auto& version = get("format_version");
  if (wrap(version, [&] { return parse_size(version.value, "format_version"); }) !=
      static_cast<std::size_t>(kModelFormatVersion)) {
    throw ParseError("unsupported format_version " + version.value, version.line);
  }
  const auto& gain_entry = get("gain");
  const auto gain = wrap(gain_entry, [&] { return ConcaveGain::parse(gain_entry.value); });
  const auto& kind = get("kind");

  if (kind.value == "linear") {
    const auto& k_entry = get("K");
    const auto k = wrap(k_entry, [&] { return parse_size(k_entry.value, "K"); });
    const auto& w = get("w");
    return wrap(w, [&] {
      return AnyModel(LinearModel{SimplexWeights(values_of(w, k, "w")), gain, {}});
    });
  }
  if (kind.value == "nested") {
    const auto& k1_entry = get("K1");
    const auto& k2_entry = get("K2");
    const auto k1 = wrap(k1_entry, [&] { return parse_size(k1_entry.value, "K1"); });
    const auto k2 = wrap(k2_entry, [&] { return parse_size(k2_entry.value, "K2"); });
    if (k1 == 0 || k2 == 0) throw ParseError("K1 and K2 must be positive", k1_entry.line);
    const auto& phi1 = get("phi1");
    const auto& phi2 = get("phi2");
    const auto& w1_entry = get("W1");
    const auto& w2_entry = get("W2");
    const auto w1 = wrap(w1_entry, [&] { return values_of(w1_entry, k1 * k2, "W1"); });
    std::vector<SimplexWeights> rows;
    for (std::size_t i = 0; i < k2; ++i) {
      rows.push_back(wrap(w1_entry, [&] {
        return SimplexWeights(std::vector<double>(w1.begin() + i * k1,
                                                  w1.begin() + (i + 1) * k1));
      }));
    }
    auto w2 = wrap(w2_entry, [&] { return SimplexWeights(values_of(w2_entry, k2, "W2")); });
    return NestedModel{std::move(rows), std::move(w2), gain,
                       wrap(phi1, [&] { return parse_activation(phi1.value); }),
                       wrap(phi2, [&] { return parse_activation(phi2.value); }),
                       {}};
  }
  throw ParseError("unknown model kind '" + kind.value + "'", kind.line);
}

AnyModel parse_model(const std::string& text) {
  std::istringstream in(text);
  return parse_model(in);
}

void save_model(const std::filesystem::path& path, const AnyModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << serialize_model(model);
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  return parse_model(in);
}

std::size_t model_inputs(const AnyModel& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->w.size();
  return std::get<NestedModel>(model).k1();
}

std::vector<double> aggregate_scores(const AnyModel& model, const QueryInstance& q) {
  return std::visit([&](const auto& m) { return aggregate_scores(m, q); }, model);
}

Ranking infer(const AnyModel& model, const QueryInstance& q) {
  return ranking_from_scores(aggregate_scores(model, q));
}

}  // namespace subrank
