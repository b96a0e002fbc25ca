#pragma once

// Plain-text model documents. Every weight is written with the shortest
// decimal form that parses back to the same double, so save/load is exact.
//
//   subrank-model                     subrank-model
//   format_version 1                  format_version 1
//   kind linear                       kind nested
//   K 3                               K1 3
//   gain logistic                     K2 10
//   w 0.2 0.5 0.3                     gain logistic
//                                     phi1 shifted_logistic
//                                     phi2 shifted_logistic
//                                     W1 <K2*K1 values, row-major>
//                                     W2 <K2 values>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "subrank/linear.hpp"
#include "subrank/nested.hpp"

namespace subrank {

inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<LinearModel, NestedModel>;

std::string serialize_model(const LinearModel& model);
std::string serialize_model(const NestedModel& model);
std::string serialize_model(const AnyModel& model);

/// Throws ParseError on malformed documents or unsupported versions.
AnyModel parse_model(std::istream& in);
AnyModel parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const AnyModel& model);
AnyModel load_model(const std::filesystem::path& path);

/// K for linear models, K1 for nested ones.
std::size_t model_inputs(const AnyModel& model);
std::vector<double> aggregate_scores(const AnyModel& model, const QueryInstance& q);
Ranking infer(const AnyModel& model, const QueryInstance& q);

}  // namespace subrank
