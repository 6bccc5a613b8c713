#include "dq/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dq/random.hpp"

namespace dq::probe {

ProbeModel::ProbeModel(std::size_t input_dim, std::size_t hidden_units, std::size_t class_count,
                       std::uint64_t seed)
    : input_dim_(input_dim),
      hidden_(hidden_units),
      classes_(class_count),
      shift_(input_dim, 0.0),
      scale_(input_dim, 1.0),
      w1_(hidden_units, input_dim),
      b1_(hidden_units, 0.0),
      w2_(class_count, hidden_units),
      b2_(class_count, 0.0) {
    if (input_dim == 0 || hidden_units == 0 || class_count < 2)
        throw Error("probe needs input_dim >= 1, hidden_units >= 1, class_count >= 2");
    Rng rng(seed);
    const double s1 = std::sqrt(1.0 / static_cast<double>(input_dim));
    for (double& w : w1_.data()) w = rng.normal() * s1;
    const double s2 = std::sqrt(1.0 / static_cast<double>(hidden_units));
    for (double& w : w2_.data()) w = rng.normal() * s2;
}

void ProbeModel::fit_scaler(const Matrix& features) {
    const std::size_t n = features.rows();
    if (n == 0) return;
    for (std::size_t j = 0; j < input_dim_; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += features(i, j);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += (features(i, j) - m) * (features(i, j) - m);
        v /= static_cast<double>(n);
        shift_[j] = m;
        scale_[j] = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
    }
}

void ProbeModel::forward(std::span<const double> x, std::span<double> hidden, std::span<double> probs) const {
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1_[h];
        const auto w = w1_.row(h);
        for (std::size_t j = 0; j < input_dim_; ++j) z += w[j] * (x[j] - shift_[j]) * scale_[j];
        hidden[h] = std::tanh(z);
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < classes_; ++k) {
        double z = b2_[k];
        const auto w = w2_.row(k);
        for (std::size_t h = 0; h < hidden_; ++h) z += w[h] * hidden[h];
        probs[k] = z;
        top = std::max(top, z);
    }
    double sum = 0.0;
    for (double& p : probs) {
        p = std::exp(p - top);
        sum += p;
    }
    for (double& p : probs) p /= sum;
}

Matrix ProbeModel::predict_proba(const Matrix& features) const {
    Matrix out(features.rows(), classes_);
    std::vector<double> hidden(hidden_);
    for (std::size_t i = 0; i < features.rows(); ++i) forward(features.row(i), hidden, out.row(i));
    return out;
}

Matrix ProbeModel::embed(const Matrix& features) const {
    Matrix out(features.rows(), hidden_);
    std::vector<double> probs(classes_);
    for (std::size_t i = 0; i < features.rows(); ++i) forward(features.row(i), out.row(i), probs);
    return out;
}

double ProbeModel::accuracy(const Matrix& features, std::span<const ClassLabel> labels) const {
    if (labels.empty()) return 0.0;
    const Matrix probs = predict_proba(features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto row = probs.row(i);
        const auto arg = static_cast<ClassLabel>(std::ranges::max_element(row) - row.begin());
        if (arg == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double ProbeModel::sgd_step(const Matrix& features, std::span<const ClassLabel> labels,
                            std::span<const std::size_t> rows, double learning_rate) {
    Matrix g_w1(hidden_, input_dim_);
    std::vector<double> g_b1(hidden_, 0.0);
    Matrix g_w2(classes_, hidden_);
    std::vector<double> g_b2(classes_, 0.0);
    std::vector<double> x(input_dim_), hidden(hidden_), probs(classes_), d_hidden(hidden_);
    double loss = 0.0;

    for (std::size_t r : rows) {
        const auto raw = features.row(r);
        forward(raw, hidden, probs);
        const auto y = static_cast<std::size_t>(labels[r]);
        loss -= std::log(std::max(probs[y], 1e-300));
        for (std::size_t j = 0; j < input_dim_; ++j) x[j] = (raw[j] - shift_[j]) * scale_[j];

        // Softmax + cross-entropy: dL/dz = p - onehot(y).
        std::ranges::fill(d_hidden, 0.0);
        for (std::size_t k = 0; k < classes_; ++k) {
            const double dz = probs[k] - (k == y ? 1.0 : 0.0);
            g_b2[k] += dz;
            auto gw = g_w2.row(k);
            const auto w = w2_.row(k);
            for (std::size_t h = 0; h < hidden_; ++h) {
                gw[h] += dz * hidden[h];
                d_hidden[h] += dz * w[h];
            }
        }
        for (std::size_t h = 0; h < hidden_; ++h) {
            const double dz = d_hidden[h] * (1.0 - hidden[h] * hidden[h]);
            g_b1[h] += dz;
            auto gw = g_w1.row(h);
            for (std::size_t j = 0; j < input_dim_; ++j) gw[j] += dz * x[j];
        }
    }

    const double step = learning_rate / static_cast<double>(rows.size());
    auto apply = [step](std::span<double> param, std::span<const double> grad) {
        for (std::size_t i = 0; i < param.size(); ++i) param[i] -= step * grad[i];
    };
    apply(w1_.data(), g_w1.data());
    apply(b1_, g_b1);
    apply(w2_.data(), g_w2.data());
    apply(b2_, g_b2);
    return loss;
}

TrainingResult train_probe(const LabelledDataset& dataset, const TrainingConfig& config, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    const auto k = static_cast<std::size_t>(dataset.class_count());
    if (n < k) throw Error("probe training needs at least as many samples as classes");
    if (config.batch_size == 0) throw Error("batch size must be positive");
    if (config.max_epochs < 2) throw Error("probe training needs at least two epochs");

    ProbeModel model(dataset.dimension(), config.hidden_units, k, derive_seed(seed, {1}));
    model.fit_scaler(dataset.features());
    Rng shuffle(derive_seed(seed, {2}));

    const Matrix& x = dataset.features();
    const auto labels = dataset.labels();
    std::vector<int> epochs;
    std::vector<Matrix> snapshots;
    std::vector<double> accuracy;
    bool stopped_early = false;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto order = shuffle.sample_without_replacement(n, n);
        double loss = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            loss += model.sgd_step(x, labels, std::span(order).subspan(start, stop - start), config.learning_rate);
        }
        if (!std::isfinite(loss))
            throw Error("probe training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");

        // Snapshot in evaluation mode, after the epoch's updates.
        Matrix probs = model.predict_proba(x);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = probs.row(i);
            if (std::ranges::max_element(row) - row.begin() == labels[i]) ++correct;
        }
        accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
        epochs.push_back(static_cast<int>(epoch));
        snapshots.push_back(std::move(probs));

        const std::size_t completed = epoch + 1;
        if (completed >= std::max<std::size_t>(config.min_epochs, 2)) {
            const double gain = accuracy[completed - 1] - accuracy[completed - 2];
            if (gain < config.min_delta) {
                stopped_early = completed < config.max_epochs;
                break;
            }
        }
    }

    Matrix hidden = model.embed(x);
    const auto ids = dataset.sample_ids();
    EmbeddingMatrix embeddings(std::vector<SampleId>(ids.begin(), ids.end()), std::move(hidden));
    return TrainingResult{std::move(model), ProbabilityHistory(std::move(epochs), std::move(snapshots)),
                          std::move(embeddings), std::move(accuracy), stopped_early};
}

}  // namespace dq::probe
