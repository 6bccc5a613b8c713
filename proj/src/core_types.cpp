#include "dq/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace dq {

LabelledDataset::LabelledDataset(Matrix features, std::vector<ClassLabel> labels, int class_count,
                                 std::vector<SampleId> sample_ids)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_count_(class_count),
      ids_(std::move(sample_ids)) {
    if (class_count_ < 2) throw Error("class count must be at least 2");
    if (labels_.empty()) throw Error("dataset must contain at least one sample");
    if (features_.cols() < 1) throw Error("feature dimension must be at least 1");
    if (features_.rows() != labels_.size() || ids_.size() != labels_.size())
        throw Error("features, labels and sample ids disagree on sample count");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= class_count_) {
            std::ostringstream os;
            os << "label " << labels_[i] << " of sample " << ids_[i].value << " is outside [0, "
               << class_count_ << ")";
            throw Error(os.str());
        }
    }
    for (double v : features_.data())
        if (!std::isfinite(v)) throw Error("feature values must be finite");
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i].value, i).second)
            throw Error("duplicate sample id " + std::to_string(ids_[i].value));
    }
}

std::size_t LabelledDataset::index_of(SampleId id) const {
    auto it = index_.find(id.value);
    if (it == index_.end()) throw Error("unknown sample id " + std::to_string(id.value));
    return it->second;
}

LabelledDataset LabelledDataset::with_labels(std::vector<ClassLabel> labels) const {
    return LabelledDataset(features_, std::move(labels), class_count_, ids_);
}

LabelledDataset LabelledDataset::subset(std::span<const SampleId> ids) const {
    Matrix features(ids.size(), features_.cols());
    std::vector<ClassLabel> labels;
    labels.reserve(ids.size());
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const std::size_t src = index_of(ids[r]);
        std::ranges::copy(features_.row(src), features.row(r).begin());
        labels.push_back(labels_[src]);
    }
    return LabelledDataset(std::move(features), std::move(labels), class_count_,
                           std::vector<SampleId>(ids.begin(), ids.end()));
}

const Matrix& ProbabilityHistory::final_epoch() const {
    if (matrices_.empty() || epochs_.size() != matrices_.size())
        throw Error("probability history has no usable epochs");
    auto it = std::ranges::max_element(epochs_);
    return matrices_[static_cast<std::size_t>(it - epochs_.begin())];
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<SampleId> ids, Matrix values)
    : ids_(std::move(ids)), values_(std::move(values)) {
    if (values_.rows() != ids_.size()) throw Error("embedding rows do not match id count");
    if (!ids_.empty() && values_.cols() < 1) throw Error("embedding dimension must be at least 1");
    for (double v : values_.data())
        if (!std::isfinite(v)) throw Error("embedding values must be finite");
    index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!index_.emplace(ids_[i].value, i).second)
            throw Error("duplicate embedding id " + std::to_string(ids_[i].value));
    }
}

std::optional<std::size_t> EmbeddingMatrix::find(SampleId id) const {
    auto it = index_.find(id.value);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingMatrix::row_of(SampleId id) const {
    auto idx = find(id);
    if (!idx) throw Error("sample id " + std::to_string(id.value) + " has no embedding");
    return values_.row(*idx);
}

std::string to_string(HistoryErrorKind kind) {
    switch (kind) {
        case HistoryErrorKind::too_few_epochs: return "too_few_epochs";
        case HistoryErrorKind::shape_mismatch: return "shape_mismatch";
        case HistoryErrorKind::duplicate_epoch: return "duplicate_epoch";
        case HistoryErrorKind::out_of_range: return "out_of_range";
        case HistoryErrorKind::row_sum: return "row_sum";
    }
    return "unknown";
}

namespace {

HistoryValidation fail(HistoryErrorKind kind, std::size_t epoch, std::size_t row, std::string msg) {
    return {kind, epoch, row, std::move(msg)};
}

}  // namespace

HistoryValidation validate_probability_history(const ProbabilityHistory& history) {
    const auto epochs = history.epochs();
    const auto matrices = history.matrices();
    if (matrices.size() < 2) return fail(HistoryErrorKind::too_few_epochs, 0, 0, "E < 2");
    if (epochs.size() != matrices.size()) {
        return fail(HistoryErrorKind::shape_mismatch, 0, 0,
                    "epoch list has " + std::to_string(epochs.size()) + " entries but " +
                        std::to_string(matrices.size()) + " matrices were supplied");
    }
    std::unordered_set<int> seen;
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        if (!seen.insert(epochs[e]).second)
            return fail(HistoryErrorKind::duplicate_epoch, e, 0,
                        "epoch " + std::to_string(epochs[e]) + " appears twice");
    }
    const std::size_t n = matrices[0].rows();
    const std::size_t k = matrices[0].cols();
    if (n == 0 || k == 0) return fail(HistoryErrorKind::shape_mismatch, 0, 0, "empty probability matrix");
    for (std::size_t e = 1; e < matrices.size(); ++e) {
        if (matrices[e].rows() != n || matrices[e].cols() != k) {
            std::ostringstream os;
            os << "epoch " << epochs[e] << " is " << matrices[e].rows() << "x" << matrices[e].cols()
               << ", expected " << n << "x" << k;
            return fail(HistoryErrorKind::shape_mismatch, e, 0, os.str());
        }
    }
    for (std::size_t e = 0; e < matrices.size(); ++e) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (double p : matrices[e].row(i)) {
                if (!(p >= 0.0 && p <= 1.0)) {
                    std::ostringstream os;
                    os << "epoch " << epochs[e] << " row " << i << ": entry " << p
                       << " outside [0,1]";
                    return fail(HistoryErrorKind::out_of_range, e, i, os.str());
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream os;
                os << "epoch " << epochs[e] << " row " << i << ": row-sum " << sum << " != 1";
                return fail(HistoryErrorKind::row_sum, e, i, os.str());
            }
        }
    }
    return {};
}

void require_valid(const ProbabilityHistory& history) {
    auto v = validate_probability_history(history);
    if (!v.ok()) throw HistoryError(std::move(v));
}

const Matrix& penultimate_epoch(const ProbabilityHistory& history) {
    const auto matrices = history.matrices();
    const auto epochs = history.epochs();
    if (matrices.size() < 2 || epochs.size() != matrices.size())
        throw HistoryError({HistoryErrorKind::too_few_epochs, 0, 0, "E < 2"});
    std::vector<std::size_t> order(matrices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::sort(order, {}, [&](std::size_t i) { return epochs[i]; });
    return matrices[order[order.size() - 2]];
}

}  // namespace dq
