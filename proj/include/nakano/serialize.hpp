#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "nakano/constructions.hpp"
#include "nakano/positivity.hpp"
#include "nakano/solver.hpp"

namespace nakano {

using Json = nlohmann::ordered_json;

/// Doubles that left the representable range serialize as the strings
/// "inf" / "-inf"; everything else as plain numbers.
Json json_number(double v);

Json to_json(const PositivityReport& r);
Json to_json(const EstimateReport& r);
Json to_json(const BochnerRecord& r);
Json to_json(const CauchySchwarzRecord& r);
Json to_json(const FalsifierRecord& r);
Json to_json(const FalsifierTrace& t);
Json to_json(const PrekopaRecord& r);

/// CSV with the columns s, term_curvature, term_gradient, total.
std::string trace_to_csv(const FalsifierTrace& t);

}  // namespace nakano
