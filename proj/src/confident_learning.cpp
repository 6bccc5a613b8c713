#include "dq/confident_learning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace dq::confident_learning {

void CLConfig::validate() const {
    if (!(flag_percentile > 0.0 && flag_percentile < 100.0))
        throw Error("flag percentile must lie strictly between 0 and 100");
}

namespace {

void check_shapes(const Matrix& probs, std::span<const ClassLabel> labels) {
    if (probs.rows() != labels.size()) {
        std::ostringstream os;
        os << "probability matrix has " << probs.rows() << " rows but " << labels.size()
           << " labels were given";
        throw Error(os.str());
    }
    for (ClassLabel l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= probs.cols())
            throw Error("label " + std::to_string(l) + " has no probability column");
}

}  // namespace

std::vector<double> compute_class_thresholds(const Matrix& probs, std::span<const ClassLabel> labels) {
    check_shapes(probs, labels);
    const std::size_t k = probs.cols();
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> n(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        sum[c] += probs(i, c);
        ++n[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (n[c] == 0) throw Error("class " + std::to_string(c) + " has no samples; its threshold is undefined");
        sum[c] /= static_cast<double>(n[c]);
    }
    return sum;
}

std::optional<std::size_t> confident_class(std::span<const double> row, std::span<const double> thresholds) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] < thresholds[j]) continue;
        if (!best || row[j] > row[*best]) best = j;
    }
    return best;
}

ConfidentJoint build_confident_joint(const Matrix& probs, std::span<const ClassLabel> labels,
                                     std::span<const double> thresholds) {
    check_shapes(probs, labels);
    const std::size_t k = probs.cols();
    if (thresholds.size() != k) throw Error("need one threshold per class");
    for (double t : thresholds)
        if (!std::isfinite(t)) throw Error("thresholds must be finite");

    ConfidentJoint cj;
    cj.class_count = k;
    cj.thresholds.assign(thresholds.begin(), thresholds.end());
    cj.counts.assign(k * k, 0);
    std::vector<std::int64_t> given(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto a = static_cast<std::size_t>(labels[i]);
        ++given[a];
        if (auto b = confident_class(probs.row(i), thresholds)) ++cj.counts[a * k + *b];
    }

    // Calibrate rows to the given-label counts, then normalise to sum 1.
    // A row with no confident samples carries no evidence of noise, so its
    // mass stays on the diagonal.
    std::vector<double> calibrated(k * k, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        std::int64_t row_sum = 0;
        for (std::size_t b = 0; b < k; ++b) row_sum += cj.counts[a * k + b];
        if (given[a] == 0) continue;
        if (row_sum == 0) {
            calibrated[a * k + a] = static_cast<double>(given[a]);
        } else {
            const double scale = static_cast<double>(given[a]) / static_cast<double>(row_sum);
            for (std::size_t b = 0; b < k; ++b)
                calibrated[a * k + b] = static_cast<double>(cj.counts[a * k + b]) * scale;
        }
        total += static_cast<double>(given[a]);
    }
    cj.joint.resize(k * k);
    for (std::size_t i = 0; i < k * k; ++i) cj.joint[i] = total > 0.0 ? calibrated[i] / total : 0.0;
    return cj;
}

std::vector<double> label_margins(const Matrix& probs, std::span<const ClassLabel> labels) {
    check_shapes(probs, labels);
    std::vector<double> margin(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto row = probs.row(i);
        const double top = *std::ranges::max_element(row);
        margin[i] = top - row[static_cast<std::size_t>(labels[i])];
    }
    return margin;
}

std::vector<std::int64_t> prune_counts(const ConfidentJoint& joint, std::size_t sample_count) {
    const std::size_t k = joint.class_count;
    std::vector<std::int64_t> n(k * k, 0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
            if (a != b) n[a * k + b] = std::llround(static_cast<double>(sample_count) * joint.q(a, b));
    return n;
}

namespace {

std::vector<ScoredId> flag_by_percentile(std::span<const SampleId> ids, std::span<const double> margin,
                                         double percentile) {
    std::vector<double> nonzero;
    for (double m : margin)
        if (m > 0.0) nonzero.push_back(m);
    if (nonzero.empty()) return {};
    const double cut = upper_percentile(nonzero, percentile);
    std::vector<ScoredId> out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (margin[i] > 0.0 && margin[i] >= cut) out.push_back({ids[i], margin[i]});
    return out;
}

std::vector<ScoredId> flag_by_joint(const Matrix& probs, std::span<const SampleId> ids,
                                    std::span<const ClassLabel> labels, const ConfidentJoint& joint,
                                    std::span<const double> margin) {
    const std::size_t k = joint.class_count;
    const auto quota = prune_counts(joint, labels.size());

    // Candidates per pair: samples counted in counts[a][b]; plus, per given
    // class, the samples that cleared no threshold. Calibration spread those
    // samples' mass over the row, so they back any quota beyond the raw count.
    std::vector<std::vector<std::size_t>> counted(k * k);
    std::vector<std::vector<std::size_t>> unassigned(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto a = static_cast<std::size_t>(labels[i]);
        if (auto b = confident_class(probs.row(i), joint.thresholds))
            counted[a * k + *b].push_back(i);
        else
            unassigned[a].push_back(i);
    }

    std::vector<bool> taken(labels.size(), false);
    std::vector<ScoredId> out;
    auto by_prob_desc = [&](std::size_t b) {
        return [&, b](std::size_t x, std::size_t y) {
            if (probs(x, b) != probs(y, b)) return probs(x, b) > probs(y, b);
            return ids[x] < ids[y];
        };
    };
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            if (a == b) continue;
            std::int64_t need = quota[a * k + b];
            if (need <= 0) continue;
            auto take_from = [&](std::vector<std::size_t> pool) {
                std::ranges::sort(pool, by_prob_desc(b));
                for (std::size_t i : pool) {
                    if (need == 0) break;
                    if (taken[i]) continue;
                    taken[i] = true;
                    out.push_back({ids[i], margin[i]});
                    --need;
                }
            };
            take_from(counted[a * k + b]);
            if (need > 0) take_from(unassigned[a]);
        }
    }
    return out;
}

}  // namespace

std::vector<ScoredId> score_and_flag(const Matrix& probs, std::span<const SampleId> ids,
                                     std::span<const ClassLabel> labels, const ConfidentJoint& joint,
                                     const CLConfig& config) {
    config.validate();
    check_shapes(probs, labels);
    if (ids.size() != labels.size()) throw Error("sample ids and labels differ in length");
    if (joint.class_count != probs.cols()) throw Error("confident joint does not match class count");

    const auto margin = label_margins(probs, labels);
    std::vector<ScoredId> flagged = config.prune_mode == PruneMode::percentile_by_score
                                        ? flag_by_percentile(ids, margin, config.flag_percentile)
                                        : flag_by_joint(probs, ids, labels, joint, margin);
    sort_by_score_desc(flagged);
    return flagged;
}

Detection detect(const ProbabilityHistory& history, std::span<const SampleId> ids,
                 std::span<const ClassLabel> labels, const CLConfig& config) {
    config.validate();
    require_valid(history);
    const Matrix& probs =
        config.epoch == EpochChoice::final ? history.final_epoch() : penultimate_epoch(history);
    Detection d;
    const auto thresholds = compute_class_thresholds(probs, labels);
    d.joint = build_confident_joint(probs, labels, thresholds);
    d.flagged = score_and_flag(probs, ids, labels, d.joint, config);
    return d;
}

std::string to_string(PruneMode m) {
    return m == PruneMode::count_by_joint ? "count-by-joint" : "percentile-by-score";
}

PruneMode prune_mode_from_string(const std::string& s) {
    if (s == "count-by-joint") return PruneMode::count_by_joint;
    if (s == "percentile-by-score") return PruneMode::percentile_by_score;
    throw Error("unknown prune mode '" + s + "'");
}

std::string to_string(EpochChoice e) { return e == EpochChoice::final ? "final" : "penultimate"; }

EpochChoice epoch_choice_from_string(const std::string& s) {
    if (s == "final") return EpochChoice::final;
    if (s == "penultimate") return EpochChoice::penultimate;
    throw Error("unknown epoch choice '" + s + "'");
}

}  // namespace dq::confident_learning
