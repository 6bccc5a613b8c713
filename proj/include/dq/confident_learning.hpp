#pragma once

// Confident-learning label error detection.
//
// Per-class self-confidence thresholds gate which classes a sample
// "confidently" belongs to. Counting (given label, confident class) pairs
// gives the confident joint; calibrating its rows to the given-label counts
// and normalising yields Q, an estimate of the joint distribution of noisy
// and latent labels. Off-diagonal mass of Q says how many samples of each
// given class to prune.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dq/core_types.hpp"
#include "dq/stats.hpp"

namespace dq::confident_learning {

enum class PruneMode { percentile_by_score, count_by_joint };
enum class EpochChoice { final, penultimate };

struct CLConfig {
    double flag_percentile = 90.0;
    PruneMode prune_mode = PruneMode::count_by_joint;
    EpochChoice epoch = EpochChoice::final;

    void validate() const;
};

struct ConfidentJoint {
    std::size_t class_count = 0;
    std::vector<double> thresholds;
    // Row-major K x K, indexed (given label, latent label).
    std::vector<std::int64_t> counts;
    std::vector<double> joint;

    std::int64_t count(std::size_t given, std::size_t latent) const {
        return counts[given * class_count + latent];
    }
    double q(std::size_t given, std::size_t latent) const { return joint[given * class_count + latent]; }

    bool operator==(const ConfidentJoint&) const = default;
};

// Mean self-probability of each class over the samples carrying that label.
// Throws dq::Error naming the first class without samples.
std::vector<double> compute_class_thresholds(const Matrix& probs, std::span<const ClassLabel> labels);

// Class with the highest probability among those clearing their threshold
// (lowest index on ties), or nullopt if none clears.
std::optional<std::size_t> confident_class(std::span<const double> row, std::span<const double> thresholds);

ConfidentJoint build_confident_joint(const Matrix& probs, std::span<const ClassLabel> labels,
                                     std::span<const double> thresholds);

// Per-sample margin of the best class over the given label; 0 when the
// given label is the argmax.
std::vector<double> label_margins(const Matrix& probs, std::span<const ClassLabel> labels);

// Number of samples to prune per (given, latent) pair: round(N * Q), zero on
// the diagonal. Row-major K x K.
std::vector<std::int64_t> prune_counts(const ConfidentJoint& joint, std::size_t sample_count);

// Flagged samples ranked by margin descending, ties by id ascending.
std::vector<ScoredId> score_and_flag(const Matrix& probs, std::span<const SampleId> ids,
                                     std::span<const ClassLabel> labels, const ConfidentJoint& joint,
                                     const CLConfig& config = {});

struct Detection {
    ConfidentJoint joint;
    std::vector<ScoredId> flagged;
};

// Full pipeline on the configured epoch of a history.
Detection detect(const ProbabilityHistory& history, std::span<const SampleId> ids,
                 std::span<const ClassLabel> labels, const CLConfig& config = {});

std::string to_string(PruneMode m);
PruneMode prune_mode_from_string(const std::string& s);
std::string to_string(EpochChoice e);
EpochChoice epoch_choice_from_string(const std::string& s);

}  // namespace dq::confident_learning
