#include "dq/cartography.hpp"

#include <algorithm>
#include <sstream>

namespace dq::cartography {

void CartographyConfig::validate() const {
    if (!(flag_percentile > 0.0 && flag_percentile < 100.0))
        throw Error("flag percentile must lie strictly between 0 and 100");
}

std::size_t SampleScores::count(Segment s) const {
    return static_cast<std::size_t>(std::ranges::count(segment, s));
}

std::vector<double> compute_confidence(const Matrix& probs, std::span<const ClassLabel> labels) {
    if (probs.rows() != labels.size()) {
        std::ostringstream os;
        os << "probability matrix has " << probs.rows() << " rows but " << labels.size()
           << " labels were given";
        throw Error(os.str());
    }
    std::vector<double> mu(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols())
            throw Error("label " + std::to_string(labels[i]) + " has no probability column");
        mu[i] = probs(i, static_cast<std::size_t>(labels[i]));
    }
    return mu;
}

std::vector<double> compute_certainty(const Matrix& probs) {
    if (probs.cols() < 2) throw Error("certainty needs at least two classes");
    std::vector<double> delta(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double best = -1.0, second = -1.0;
        for (double p : probs.row(i)) {
            if (p > best) {
                second = best;
                best = p;
            } else if (p > second) {
                second = p;
            }
        }
        delta[i] = best - second;
    }
    return delta;
}

namespace {

Segment classify(double mu, double delta, double mu_split, double delta_split) {
    const bool high_conf = mu > mu_split;
    const bool high_cert = delta > delta_split;
    if (high_conf) return high_cert ? Segment::high_conf_high_cert : Segment::high_conf_low_cert;
    return high_cert ? Segment::low_conf_high_cert : Segment::low_conf_low_cert;
}

double split_value(std::span<const double> values, SplitStatistic stat, double fixed) {
    switch (stat) {
        case SplitStatistic::median: return median(values);
        case SplitStatistic::mean: return mean(values);
        case SplitStatistic::fixed: return fixed;
    }
    return fixed;
}

}  // namespace

SampleScores score_dataset(const ProbabilityHistory& history, std::span<const SampleId> ids,
                           std::span<const ClassLabel> labels, const CartographyConfig& config) {
    config.validate();
    require_valid(history);
    const Matrix& probs = penultimate_epoch(history);
    if (ids.size() != labels.size()) throw Error("sample ids and labels differ in length");

    SampleScores s;
    s.ids.assign(ids.begin(), ids.end());
    s.mu = compute_confidence(probs, labels);
    s.delta = compute_certainty(probs);
    s.confidence_split = split_value(s.mu, config.segment_split, config.fixed_confidence_split);
    s.certainty_split = split_value(s.delta, config.segment_split, config.fixed_certainty_split);

    const std::size_t n = s.ids.size();
    s.segment.resize(n);
    s.composite.resize(n);
    s.flagged.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        s.segment[i] = classify(s.mu[i], s.delta[i], s.confidence_split, s.certainty_split);
        s.composite[i] = s.delta[i] * (1.0 - s.mu[i]);
    }
    return s;
}

std::vector<ScoredId> flag_noisy(const SampleScores& scores, const CartographyConfig& config) {
    config.validate();
    std::vector<ScoredId> members;
    std::vector<double> values;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores.segment[i] != Segment::low_conf_high_cert) continue;
        members.push_back({scores.ids[i], scores.composite[i]});
        values.push_back(scores.composite[i]);
    }
    if (members.empty()) return {};

    const double cut = upper_percentile(values, config.flag_percentile);
    std::erase_if(members, [cut](const ScoredId& m) { return m.score < cut; });
    sort_by_score_desc(members);
    return members;
}

SampleScores score_and_flag(const ProbabilityHistory& history, std::span<const SampleId> ids,
                            std::span<const ClassLabel> labels, const CartographyConfig& config) {
    SampleScores s = score_dataset(history, ids, labels, config);
    const auto flags = flag_noisy(s, config);
    std::unordered_map<SampleId, std::size_t> pos;
    for (std::size_t i = 0; i < s.size(); ++i) pos.emplace(s.ids[i], i);
    for (const auto& f : flags) s.flagged[pos.at(f.id)] = true;
    return s;
}

std::string to_string(Segment s) {
    switch (s) {
        case Segment::low_conf_high_cert: return "low-conf/high-cert";
        case Segment::low_conf_low_cert: return "low-conf/low-cert";
        case Segment::high_conf_high_cert: return "high-conf/high-cert";
        case Segment::high_conf_low_cert: return "high-conf/low-cert";
    }
    return "unknown";
}

Segment segment_from_string(const std::string& s) {
    for (Segment seg : {Segment::low_conf_high_cert, Segment::low_conf_low_cert,
                        Segment::high_conf_high_cert, Segment::high_conf_low_cert})
        if (to_string(seg) == s) return seg;
    throw Error("unknown segment '" + s + "'");
}

std::string to_string(SplitStatistic s) {
    switch (s) {
        case SplitStatistic::median: return "median";
        case SplitStatistic::mean: return "mean";
        case SplitStatistic::fixed: return "fixed";
    }
    return "unknown";
}

SplitStatistic split_from_string(const std::string& s) {
    if (s == "median") return SplitStatistic::median;
    if (s == "mean") return SplitStatistic::mean;
    if (s == "fixed") return SplitStatistic::fixed;
    throw Error("unknown segment split '" + s + "'");
}

}  // namespace dq::cartography
