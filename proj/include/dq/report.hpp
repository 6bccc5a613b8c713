#pragma once

// Report documents: pretty-printed JSON with sorted keys so that output is
// byte-stable and diffs are readable.
//
//   {
//     "format_version": 1,
//     "tool": "dqkit", "tool_version": "...",
//     "generated_at": "...",          // excluded from determinism/fingerprint
//     "input_fingerprint": "sha256:...",
//     "command": "...", "config": {...},
//     "payload_kind": "...", "payload": {...}
//   }

#include <string>

#include <json.hpp>

#include "dq/benchmark.hpp"
#include "dq/cartography.hpp"
#include "dq/confident_learning.hpp"
#include "dq/coreset.hpp"
#include "dq/harness.hpp"

namespace dq {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolName = "dqkit";
inline constexpr const char* kToolVersion = "0.3.0";

void to_json(nlohmann::json& j, const SampleId& id);
void from_json(const nlohmann::json& j, SampleId& id);
void to_json(nlohmann::json& j, const ScoredId& s);
void from_json(const nlohmann::json& j, ScoredId& s);

namespace cartography {
void to_json(nlohmann::json& j, const SampleScores& s);
void from_json(const nlohmann::json& j, SampleScores& s);
nlohmann::json config_json(const CartographyConfig& c);
}  // namespace cartography

namespace confident_learning {
void to_json(nlohmann::json& j, const ConfidentJoint& c);
void from_json(const nlohmann::json& j, ConfidentJoint& c);
nlohmann::json config_json(const CLConfig& c);
}  // namespace confident_learning

namespace coreset {
void to_json(nlohmann::json& j, const SelectionResult& s);
void from_json(const nlohmann::json& j, SelectionResult& s);
}  // namespace coreset

namespace harness {
void to_json(nlohmann::json& j, const NoiseInjectionRecord& r);
void from_json(const nlohmann::json& j, NoiseInjectionRecord& r);
void to_json(nlohmann::json& j, const DetectionReport& r);
void from_json(const nlohmann::json& j, DetectionReport& r);
void to_json(nlohmann::json& j, const LiftCell& c);
void from_json(const nlohmann::json& j, LiftCell& c);
void to_json(nlohmann::json& j, const LiftReport& r);
void from_json(const nlohmann::json& j, LiftReport& r);

// Benchmark configuration files use the same conventions; absent keys keep
// their defaults.
void to_json(nlohmann::json& j, const BenchmarkConfig& c);
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
}  // namespace harness

// Flag list payload shared by both detectors.
struct FlagReport {
    std::string method;
    std::vector<ScoredId> flagged;
    std::optional<confident_learning::ConfidentJoint> joint;
    std::size_t sample_count = 0;

    bool operator==(const FlagReport&) const = default;
};
void to_json(nlohmann::json& j, const FlagReport& r);
void from_json(const nlohmann::json& j, FlagReport& r);

struct ReportDocument {
    std::string command;
    std::string input_fingerprint;
    std::string generated_at;
    nlohmann::json config = nlohmann::json::object();
    std::string payload_kind;
    nlohmann::json payload;
};

nlohmann::json to_json(const ReportDocument& doc);
// Throws dq::Error on a missing/unsupported format version.
ReportDocument parse_document(const std::string& text);
std::string render(const ReportDocument& doc);

// Current UTC time as an ISO-8601 string.
std::string utc_timestamp();

}  // namespace dq
