#include "report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace ralign::report {

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

Json to_json(const Interval& interval) { return Json{{"lo", interval.lo}, {"hi", interval.hi}}; }

Json thresholds_json(const Thresholds& t) { return Json{{"lo", t.lo}, {"hi", t.hi}}; }

Json to_json(const SimilaritySummary& s) {
    Json j;
    j["metric"] = std::string(to_string(s.metric));
    j["orientation"] = s.metric == MetricKind::EuclideanDistance ? "negated distance" : "similarity";
    j["mean_aesthetic"] = s.mean_aesthetic;
    j["mean_unaesthetic"] = s.mean_unaesthetic;
    j["delta"] = s.delta;
    j["pair_counts"] = Json{{"aesthetic", s.pair_counts.first}, {"unaesthetic", s.pair_counts.second}};
    j["subsample_seed"] = s.subsample_seed ? Json(*s.subsample_seed) : Json(nullptr);
    return j;
}

Json to_json(const TestReport& t) {
    Json j;
    j["observed"] = t.observed;
    j["p_value"] = t.p_value;
    j["alternative"] = std::string(to_string(t.alternative));
    j["ci"] = to_json(t.ci);
    j["level"] = t.level;
    j["n_resamples"] = t.n_resamples;
    j["seed"] = t.seed.value;
    return j;
}

Json to_json(const LayerCurve& curve) {
    Json points = Json::array();
    for (const auto& p : curve.points) {
        Json strata = Json::object();
        for (const auto& [s, v] : p.per_stratum) strata[std::string(to_string(s))] = v;
        points.push_back(Json{{"layer_name", p.layer_name},
                              {"depth_fraction", p.depth_fraction},
                              {"overall", p.overall},
                              {"per_stratum", std::move(strata)}});
    }
    return points;
}

Json envelope(std::string_view command, const std::string& command_line, Json parameters) {
    Json j;
    j["tool"] = std::string(kToolName);
    j["tool_version"] = std::string(kToolVersion);
    j["schema_version"] = kSchemaVersion;
    j["command"] = std::string(command);
    j["command_line"] = command_line;
    j["parameters"] = std::move(parameters);
    return j;
}

std::string curve_csv(const LayerCurve& curve) {
    std::ostringstream out;
    out << "layer_name,depth_fraction,stratum,alignment\n";
    for (const auto& p : curve.points) {
        out << p.layer_name << ',' << format_number(p.depth_fraction) << ",all," << format_number(p.overall) << '\n';
        for (const auto& [s, v] : p.per_stratum) {
            out << p.layer_name << ',' << format_number(p.depth_fraction) << ',' << to_string(s) << ','
                << format_number(v) << '\n';
        }
    }
    return out.str();
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace ralign::report
