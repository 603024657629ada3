#pragma once

#include "ralign/alignkit.hpp"
#include "ralign/simkit.hpp"
#include "ralign/stats.hpp"

#include <json.hpp>

#include <string>

namespace ralign::report {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolName = "ralign";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

Json to_json(const Interval& interval);
Json to_json(const SimilaritySummary& summary);
Json to_json(const TestReport& test);
Json to_json(const LayerCurve& curve);
Json thresholds_json(const Thresholds& t);

/// Envelope shared by every report: tool identity, schema version, command echo.
Json envelope(std::string_view command, const std::string& command_line, Json parameters);

/// `layer_name,depth_fraction,stratum,alignment`; one "all" row per layer
/// followed by one row per non-empty stratum.
std::string curve_csv(const LayerCurve& curve);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& doc);

}  // namespace ralign::report
