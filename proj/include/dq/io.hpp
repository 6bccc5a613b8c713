#pragma once

// Delimited-text inputs. Every file has one header row; `#` lines and blank
// lines are ignored. Column conventions:
//
//   labels       id,label
//   features     id,<one column per feature>
//   embeddings   id,<one column per coordinate>
//   probabilities, either one file per epoch (epoch = position in the list)
//                    id,<one column per class>
//                or a single long-format file
//                    epoch,id,<one column per class>
//
// Ids are non-negative integers. Files are aligned by id; the labels file
// (or else the features, probabilities, embeddings file) fixes the order.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dq/core_types.hpp"

namespace dq::io {

// Parse or consistency failure tied to a file location (line/column are
// 1-based; 0 means "whole file").
class InputError : public Error {
public:
    InputError(std::string file, std::size_t line, std::size_t column, const std::string& message);
    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::string file_;
    std::size_t line_, column_;
};

struct TabularInputSpec {
    std::optional<std::filesystem::path> features;
    std::optional<std::filesystem::path> labels;
    std::optional<std::filesystem::path> embeddings;
    std::vector<std::filesystem::path> probabilities;
    char delimiter = ',';
    // Overrides the class count inferred from probability columns / labels.
    std::optional<int> class_count;
    // Fewer epochs than this is reported as "E < 2". Selection only needs a
    // single snapshot and lowers it to 1.
    std::size_t min_epochs = 2;
};

struct LoadedInputs {
    std::vector<SampleId> ids;
    std::vector<ClassLabel> labels;  // empty when no labels file
    int class_count = 0;
    std::optional<LabelledDataset> dataset;  // needs features and labels
    std::optional<ProbabilityHistory> history;
    std::optional<EmbeddingMatrix> embeddings;
    std::vector<std::string> absent;  // input kinds that were not supplied
};

LoadedInputs load_inputs(const TabularInputSpec& spec);

// Reads a single-column id list (header `id`).
std::vector<SampleId> load_id_list(const std::filesystem::path& path, char delimiter = ',');

// SHA-256 over the bytes of every supplied input, in a fixed role order.
std::string fingerprint(const TabularInputSpec& spec);
std::string fingerprint_files(const std::vector<std::pair<std::string, std::filesystem::path>>& files);

std::string format_labels_csv(std::span<const SampleId> ids, std::span<const ClassLabel> labels);
std::string format_matrix_csv(std::span<const SampleId> ids, const Matrix& values, const std::string& prefix);
std::string format_history_csv(std::span<const SampleId> ids, const ProbabilityHistory& history);
std::string format_id_list_csv(std::span<const SampleId> ids);

// Writes via a temporary file and rename so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace dq::io
