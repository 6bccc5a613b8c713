#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dq/matrix.hpp"

namespace dq {

// Opaque sample identifier. Ordering is only used for deterministic tie-breaks.
struct SampleId {
    std::uint64_t value = 0;
    auto operator<=>(const SampleId&) const = default;
};

using ClassLabel = int;

// Base for all recoverable domain errors (bad input, degenerate data).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LabelledDataset {
public:
    LabelledDataset(Matrix features, std::vector<ClassLabel> labels, int class_count,
                    std::vector<SampleId> sample_ids);

    const Matrix& features() const { return features_; }
    std::span<const ClassLabel> labels() const { return labels_; }
    std::span<const SampleId> sample_ids() const { return ids_; }
    int class_count() const { return class_count_; }
    std::size_t size() const { return labels_.size(); }
    std::size_t dimension() const { return features_.cols(); }

    // Row index of an id; throws dq::Error on unknown ids.
    std::size_t index_of(SampleId id) const;

    // Same samples with a different label vector.
    LabelledDataset with_labels(std::vector<ClassLabel> labels) const;
    // Rows picked in the order given.
    LabelledDataset subset(std::span<const SampleId> ids) const;

private:
    Matrix features_;
    std::vector<ClassLabel> labels_;
    int class_count_;
    std::vector<SampleId> ids_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

// Per-epoch N x K predicted probabilities. Not validated on construction so
// that malformed histories can be diagnosed by validate_probability_history.
class ProbabilityHistory {
public:
    ProbabilityHistory() = default;
    ProbabilityHistory(std::vector<int> epochs, std::vector<Matrix> matrices)
        : epochs_(std::move(epochs)), matrices_(std::move(matrices)) {}

    std::span<const int> epochs() const { return epochs_; }
    std::span<const Matrix> matrices() const { return matrices_; }
    std::size_t epoch_count() const { return matrices_.size(); }

    // Matrix belonging to the largest epoch number.
    const Matrix& final_epoch() const;

    bool operator==(const ProbabilityHistory&) const = default;

private:
    std::vector<int> epochs_;
    std::vector<Matrix> matrices_;
};

class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::vector<SampleId> ids, Matrix values);

    std::span<const SampleId> ids() const { return ids_; }
    const Matrix& values() const { return values_; }
    std::size_t size() const { return ids_.size(); }

    std::optional<std::size_t> find(SampleId id) const;
    std::span<const double> row_of(SampleId id) const;

private:
    std::vector<SampleId> ids_;
    Matrix values_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

inline constexpr double kRowSumTolerance = 1e-6;

enum class HistoryErrorKind {
    too_few_epochs,
    shape_mismatch,
    duplicate_epoch,
    out_of_range,
    row_sum,
};

struct HistoryValidation {
    std::optional<HistoryErrorKind> error;
    // Position in the supplied epoch list and row of the first offence.
    std::size_t epoch_position = 0;
    std::size_t row = 0;
    std::string message;

    bool ok() const { return !error.has_value(); }
};

HistoryValidation validate_probability_history(const ProbabilityHistory& history);

// Thrown when a history is unusable; carries the same diagnosis.
class HistoryError : public Error {
public:
    explicit HistoryError(HistoryValidation v) : Error(v.message), validation_(std::move(v)) {}
    const HistoryValidation& validation() const { return validation_; }

private:
    HistoryValidation validation_;
};

void require_valid(const ProbabilityHistory& history);

// Matrix of the second-to-last epoch by epoch number (not by storage order).
const Matrix& penultimate_epoch(const ProbabilityHistory& history);

std::string to_string(HistoryErrorKind kind);

}  // namespace dq

template <>
struct std::hash<dq::SampleId> {
    std::size_t operator()(const dq::SampleId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
