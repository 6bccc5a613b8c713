#pragma once

// Confidence/certainty scoring on the penultimate-epoch predictions.
//
//   confidence mu    = p(given label)
//   certainty  delta = p(top class) - p(runner-up class)
//   composite        = delta * (1 - mu)
//
// Samples are split into four segments by comparing mu and delta against a
// dataset-wide split statistic. Mislabelled samples concentrate in the
// low-confidence / high-certainty segment: the model is sure of a class that
// is not the given one. Within that segment the upper tail of composite is
// flagged.

#include <span>
#include <string>
#include <vector>

#include "dq/core_types.hpp"
#include "dq/stats.hpp"

namespace dq::cartography {

enum class Segment {
    low_conf_high_cert,
    low_conf_low_cert,
    high_conf_high_cert,
    high_conf_low_cert,
};

enum class SplitStatistic { median, mean, fixed };

struct CartographyConfig {
    double flag_percentile = 90.0;
    SplitStatistic segment_split = SplitStatistic::median;
    // Only used with SplitStatistic::fixed.
    double fixed_confidence_split = 0.5;
    double fixed_certainty_split = 0.5;

    void validate() const;
};

struct SampleScores {
    std::vector<SampleId> ids;
    std::vector<double> mu;
    std::vector<double> delta;
    std::vector<Segment> segment;
    std::vector<double> composite;
    std::vector<bool> flagged;
    double confidence_split = 0.0;
    double certainty_split = 0.0;

    std::size_t size() const { return ids.size(); }
    std::size_t count(Segment s) const;
    bool operator==(const SampleScores&) const = default;
};

std::vector<double> compute_confidence(const Matrix& probs, std::span<const ClassLabel> labels);
std::vector<double> compute_certainty(const Matrix& probs);

// Scores on the penultimate epoch; `flagged` is left false (see flag_noisy).
SampleScores score_dataset(const ProbabilityHistory& history, std::span<const SampleId> ids,
                           std::span<const ClassLabel> labels, const CartographyConfig& config = {});

// Flags the upper flag_percentile tail of composite inside the
// low-confidence/high-certainty segment. Returns flagged samples ranked by
// composite descending, ties by id ascending.
std::vector<ScoredId> flag_noisy(const SampleScores& scores, const CartographyConfig& config = {});

// score_dataset followed by flag_noisy, with `flagged` filled in.
SampleScores score_and_flag(const ProbabilityHistory& history, std::span<const SampleId> ids,
                            std::span<const ClassLabel> labels, const CartographyConfig& config = {});

std::string to_string(Segment s);
Segment segment_from_string(const std::string& s);
std::string to_string(SplitStatistic s);
SplitStatistic split_from_string(const std::string& s);

}  // namespace dq::cartography
