#pragma once

#include <string>

#include "json.hpp"

namespace compalign {

using Json = nlohmann::ordered_json;

/// Serializes with a 2-space indent and every floating-point value printed
/// as "%.17g", so report files are byte-stable and round-trip exactly.
std::string dump_report(const Json& document);

/// Same float formatting on a single line (JSONL records, wire bodies).
std::string dump_compact(const Json& document);

}  // namespace compalign
