#pragma once

// Small D -> H (tanh) -> K (softmax) classifier trained with mini-batch SGD.
// Stands in for a fine-tuned encoder: it yields per-epoch probability
// snapshots for the detectors and hidden activations as embeddings.

#include <cstdint>
#include <vector>

#include "dq/core_types.hpp"

namespace dq::probe {

struct TrainingConfig {
    std::size_t hidden_units = 16;
    std::size_t max_epochs = 60;
    double learning_rate = 0.1;
    std::size_t batch_size = 32;
    // Stop once training accuracy improves by less than this between epochs.
    double min_delta = 0.001;
    // Completed epochs required before early stopping may trigger.
    std::size_t min_epochs = 2;
};

class ProbeModel {
public:
    ProbeModel(std::size_t input_dim, std::size_t hidden_units, std::size_t class_count, std::uint64_t seed);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t hidden_units() const { return hidden_; }
    std::size_t class_count() const { return classes_; }

    // Input standardisation is part of the model; fitted once before training.
    void fit_scaler(const Matrix& features);

    Matrix predict_proba(const Matrix& features) const;
    // Hidden-layer activations, N x H.
    Matrix embed(const Matrix& features) const;
    double accuracy(const Matrix& features, std::span<const ClassLabel> labels) const;

    // One SGD step on the given rows; returns the batch's summed loss.
    double sgd_step(const Matrix& features, std::span<const ClassLabel> labels,
                    std::span<const std::size_t> rows, double learning_rate);

private:
    void forward(std::span<const double> x, std::span<double> hidden, std::span<double> probs) const;

    std::size_t input_dim_, hidden_, classes_;
    std::vector<double> shift_, scale_;
    Matrix w1_;  // H x D
    std::vector<double> b1_;
    Matrix w2_;  // K x H
    std::vector<double> b2_;
};

struct TrainingResult {
    ProbeModel model;
    ProbabilityHistory history;
    EmbeddingMatrix embeddings;
    std::vector<double> training_accuracy;
    bool stopped_early = false;
};

// Throws dq::Error naming the epoch if the loss turns non-finite.
TrainingResult train_probe(const LabelledDataset& dataset, const TrainingConfig& config, std::uint64_t seed);

}  // namespace dq::probe
