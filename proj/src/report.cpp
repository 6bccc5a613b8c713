#include "dq/report.hpp"

#include <chrono>
#include <ctime>
#include <set>

namespace dq {

using nlohmann::json;

void to_json(json& j, const SampleId& id) { j = id.value; }
void from_json(const json& j, SampleId& id) { id.value = j.get<std::uint64_t>(); }

void to_json(json& j, const ScoredId& s) { j = json{{"id", s.id}, {"score", s.score}}; }
void from_json(const json& j, ScoredId& s) {
    s.id = j.at("id").get<SampleId>();
    s.score = j.at("score").get<double>();
}

namespace cartography {

void to_json(json& j, const SampleScores& s) {
    json samples = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        samples.push_back({{"id", s.ids[i]},
                           {"mu", s.mu[i]},
                           {"delta", s.delta[i]},
                           {"segment", to_string(s.segment[i])},
                           {"composite", s.composite[i]},
                           {"flagged", static_cast<bool>(s.flagged[i])}});
    }
    json counts = json::object();
    for (Segment seg : {Segment::low_conf_high_cert, Segment::low_conf_low_cert, Segment::high_conf_high_cert,
                        Segment::high_conf_low_cert})
        counts[to_string(seg)] = s.count(seg);
    j = json{{"split", {{"confidence", s.confidence_split}, {"certainty", s.certainty_split}}},
             {"segment_counts", counts},
             {"flagged_count", std::ranges::count(s.flagged, true)},
             {"samples", samples}};
}

void from_json(const json& j, SampleScores& s) {
    s = {};
    s.confidence_split = j.at("split").at("confidence").get<double>();
    s.certainty_split = j.at("split").at("certainty").get<double>();
    for (const auto& e : j.at("samples")) {
        s.ids.push_back(e.at("id").get<SampleId>());
        s.mu.push_back(e.at("mu").get<double>());
        s.delta.push_back(e.at("delta").get<double>());
        s.segment.push_back(segment_from_string(e.at("segment").get<std::string>()));
        s.composite.push_back(e.at("composite").get<double>());
        s.flagged.push_back(e.at("flagged").get<bool>());
    }
}

json config_json(const CartographyConfig& c) {
    json j{{"flag_percentile", c.flag_percentile}, {"segment_split", to_string(c.segment_split)}};
    if (c.segment_split == SplitStatistic::fixed) {
        j["fixed_confidence_split"] = c.fixed_confidence_split;
        j["fixed_certainty_split"] = c.fixed_certainty_split;
    }
    return j;
}

}  // namespace cartography

namespace confident_learning {

void to_json(json& j, const ConfidentJoint& c) {
    const std::size_t k = c.class_count;
    json counts = json::array(), joint = json::array();
    for (std::size_t a = 0; a < k; ++a) {
        json crow = json::array(), qrow = json::array();
        for (std::size_t b = 0; b < k; ++b) {
            crow.push_back(c.count(a, b));
            qrow.push_back(c.q(a, b));
        }
        counts.push_back(crow);
        joint.push_back(qrow);
    }
    j = json{{"class_count", k}, {"thresholds", c.thresholds}, {"counts", counts}, {"joint", joint}};
}

void from_json(const json& j, ConfidentJoint& c) {
    c = {};
    c.class_count = j.at("class_count").get<std::size_t>();
    c.thresholds = j.at("thresholds").get<std::vector<double>>();
    for (const auto& row : j.at("counts"))
        for (const auto& v : row) c.counts.push_back(v.get<std::int64_t>());
    for (const auto& row : j.at("joint"))
        for (const auto& v : row) c.joint.push_back(v.get<double>());
    if (c.counts.size() != c.class_count * c.class_count || c.joint.size() != c.counts.size())
        throw Error("confident joint matrices do not match class_count");
}

json config_json(const CLConfig& c) {
    return json{{"flag_percentile", c.flag_percentile},
                {"prune_mode", to_string(c.prune_mode)},
                {"epoch", to_string(c.epoch)}};
}

}  // namespace confident_learning

namespace coreset {

void to_json(json& j, const SelectionResult& s) {
    j = json{{"strategy", to_string(s.strategy)}, {"selected", s.selected}};
    j["coverage_radius"] = s.coverage_radius ? json(*s.coverage_radius) : json(nullptr);
}

void from_json(const json& j, SelectionResult& s) {
    s.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    s.selected = j.at("selected").get<std::vector<SampleId>>();
    const auto& r = j.at("coverage_radius");
    s.coverage_radius = r.is_null() ? std::nullopt : std::optional<double>(r.get<double>());
}

}  // namespace coreset

namespace harness {

void to_json(json& j, const NoiseInjectionRecord& r) {
    json samples = json::array();
    for (std::size_t i = 0; i < r.ids.size(); ++i)
        samples.push_back({{"id", r.ids[i]}, {"original", r.original_labels[i]}, {"noisy", r.noisy_labels[i]}});
    j = json{{"rate", r.rate}, {"induced", r.flipped.size()}, {"flipped", r.flipped}, {"samples", samples}};
}

void from_json(const json& j, NoiseInjectionRecord& r) {
    r = {};
    r.rate = j.at("rate").get<double>();
    r.flipped = j.at("flipped").get<std::vector<SampleId>>();
    for (const auto& s : j.at("samples")) {
        r.ids.push_back(s.at("id").get<SampleId>());
        r.original_labels.push_back(s.at("original").get<ClassLabel>());
        r.noisy_labels.push_back(s.at("noisy").get<ClassLabel>());
    }
}

void to_json(json& j, const DetectionReport& r) {
    j = json{{"induced", r.induced},     {"flagged", r.flagged}, {"overlap", r.overlap},
             {"precision", r.precision}, {"recall", r.recall},   {"accuracy", r.accuracy}};
}

void from_json(const json& j, DetectionReport& r) {
    r.induced = j.at("induced").get<std::size_t>();
    r.flagged = j.at("flagged").get<std::size_t>();
    r.overlap = j.at("overlap").get<std::size_t>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
}

void to_json(json& j, const LiftCell& c) {
    j = json{{"seed_strategy", to_string(c.seed_strategy)},
             {"expansion", to_string(c.expansion)},
             {"accuracies", c.accuracies},
             {"mean", c.mean},
             {"stddev", c.stddev},
             {"final_training_size", c.final_training_size}};
}

void from_json(const json& j, LiftCell& c) {
    c.seed_strategy = seed_strategy_from_string(j.at("seed_strategy").get<std::string>());
    c.expansion = expansion_from_string(j.at("expansion").get<std::string>());
    c.accuracies = j.at("accuracies").get<std::vector<double>>();
    c.mean = j.at("mean").get<double>();
    c.stddev = j.at("stddev").get<double>();
    c.final_training_size = j.at("final_training_size").get<std::size_t>();
}

void to_json(json& j, const LiftReport& r) {
    json rows = json::array(), cols = json::array();
    for (auto s : r.rows) rows.push_back(to_string(s));
    for (auto e : r.columns) cols.push_back(to_string(e));
    j = json{{"repetitions", r.repetitions}, {"rows", rows}, {"columns", cols}, {"cells", r.cells}};
}

void from_json(const json& j, LiftReport& r) {
    r = {};
    r.repetitions = j.at("repetitions").get<std::size_t>();
    for (const auto& s : j.at("rows")) r.rows.push_back(seed_strategy_from_string(s.get<std::string>()));
    for (const auto& e : j.at("columns")) r.columns.push_back(expansion_from_string(e.get<std::string>()));
    r.cells = j.at("cells").get<std::vector<LiftCell>>();
}

void to_json(json& j, const BenchmarkConfig& c) {
    json seeds = json::array(), exps = json::array();
    for (auto s : c.seed_strategies) seeds.push_back(to_string(s));
    for (auto e : c.expansions) exps.push_back(to_string(e));
    j = json{{"format_version", kFormatVersion},
             {"pool_per_class", c.pool_per_class},
             {"test_per_class", c.test_per_class},
             {"class_count", c.class_count},
             {"dimension", c.dimension},
             {"separation", c.separation},
             {"seed_size", c.seed_size},
             {"budget", c.budget},
             {"repetitions", c.repetitions},
             {"bootstrap_size", c.bootstrap_size},
             {"seed", c.seed},
             {"training",
              {{"hidden_units", c.training.hidden_units},
               {"max_epochs", c.training.max_epochs},
               {"learning_rate", c.training.learning_rate},
               {"batch_size", c.training.batch_size},
               {"min_delta", c.training.min_delta},
               {"min_epochs", c.training.min_epochs}}},
             {"seed_strategies", seeds},
             {"expansions", exps}};
}

BenchmarkConfig benchmark_config_from_json(const json& j) {
    if (!j.is_object()) throw Error("benchmark config must be a JSON object");
    static const std::set<std::string> known{
        "format_version", "pool_per_class", "test_per_class", "class_count",     "dimension",
        "separation",     "seed_size",      "budget",         "repetitions",     "bootstrap_size",
        "seed",           "training",       "seed_strategies", "expansions"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw Error("unknown benchmark config key '" + key + "'");
    const int version = j.value("format_version", kFormatVersion);
    if (version != kFormatVersion) throw Error("unsupported benchmark config format_version " + std::to_string(version));

    BenchmarkConfig c;
    try {
        c.pool_per_class = j.value("pool_per_class", c.pool_per_class);
        c.test_per_class = j.value("test_per_class", c.test_per_class);
        c.class_count = j.value("class_count", c.class_count);
        c.dimension = j.value("dimension", c.dimension);
        c.separation = j.value("separation", c.separation);
        c.seed_size = j.value("seed_size", c.seed_size);
        c.budget = j.value("budget", c.budget);
        c.repetitions = j.value("repetitions", c.repetitions);
        c.bootstrap_size = j.value("bootstrap_size", c.bootstrap_size);
        c.seed = j.value("seed", c.seed);
        if (j.contains("training")) {
            const auto& t = j.at("training");
            static const std::set<std::string> tkeys{"hidden_units", "max_epochs", "learning_rate",
                                                     "batch_size",   "min_delta",  "min_epochs"};
            for (const auto& [key, _] : t.items())
                if (!tkeys.contains(key)) throw Error("unknown training config key '" + key + "'");
            c.training.hidden_units = t.value("hidden_units", c.training.hidden_units);
            c.training.max_epochs = t.value("max_epochs", c.training.max_epochs);
            c.training.learning_rate = t.value("learning_rate", c.training.learning_rate);
            c.training.batch_size = t.value("batch_size", c.training.batch_size);
            c.training.min_delta = t.value("min_delta", c.training.min_delta);
            c.training.min_epochs = t.value("min_epochs", c.training.min_epochs);
        }
        if (j.contains("seed_strategies")) {
            c.seed_strategies.clear();
            for (const auto& s : j.at("seed_strategies"))
                c.seed_strategies.push_back(seed_strategy_from_string(s.get<std::string>()));
        }
        if (j.contains("expansions")) {
            c.expansions.clear();
            for (const auto& e : j.at("expansions")) c.expansions.push_back(expansion_from_string(e.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed benchmark config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace harness

void to_json(json& j, const FlagReport& r) {
    j = json{{"method", r.method},
             {"sample_count", r.sample_count},
             {"flagged_count", r.flagged.size()},
             {"flagged", r.flagged}};
    j["confident_joint"] = r.joint ? json(*r.joint) : json(nullptr);
}

void from_json(const json& j, FlagReport& r) {
    r.method = j.at("method").get<std::string>();
    r.sample_count = j.at("sample_count").get<std::size_t>();
    r.flagged = j.at("flagged").get<std::vector<ScoredId>>();
    const auto& cj = j.at("confident_joint");
    r.joint = cj.is_null() ? std::nullopt
                           : std::optional<confident_learning::ConfidentJoint>(cj.get<confident_learning::ConfidentJoint>());
}

json to_json(const ReportDocument& doc) {
    return json{{"format_version", kFormatVersion},
                {"tool", kToolName},
                {"tool_version", kToolVersion},
                {"generated_at", doc.generated_at},
                {"input_fingerprint", doc.input_fingerprint},
                {"command", doc.command},
                {"config", doc.config},
                {"payload_kind", doc.payload_kind},
                {"payload", doc.payload}};
}

ReportDocument parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("report is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("format_version")) throw Error("report has no format_version");
    if (j.at("format_version").get<int>() != kFormatVersion)
        throw Error("unsupported report format_version " + j.at("format_version").dump());
    ReportDocument doc;
    try {
        doc.command = j.at("command").get<std::string>();
        doc.input_fingerprint = j.at("input_fingerprint").get<std::string>();
        doc.generated_at = j.at("generated_at").get<std::string>();
        doc.config = j.at("config");
        doc.payload_kind = j.at("payload_kind").get<std::string>();
        doc.payload = j.at("payload");
    } catch (const json::exception& e) {
        throw Error(std::string("malformed report: ") + e.what());
    }
    return doc;
}

std::string render(const ReportDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace dq
