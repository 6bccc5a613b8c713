#include "dq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dq/cartography.hpp"
#include "dq/random.hpp"

namespace dq::harness {

LabelledDataset generate_blobs(std::size_t n_per_class, int class_count, std::size_t dimension,
                               double separation, std::uint64_t seed) {
    if (class_count < 2) throw Error("blobs need at least two classes");
    if (n_per_class == 0 || dimension == 0) throw Error("blobs need n_per_class >= 1 and dimension >= 1");
    if (!(separation > 0.0)) throw Error("blob separation must be positive");

    const auto k = static_cast<std::size_t>(class_count);
    Rng rng(seed);
    // Box wide enough that rejection placement succeeds quickly.
    const double cells = std::ceil(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(dimension)));
    const double side = separation * std::max(1.0, cells) * 1.5;

    constexpr int kMaxAttempts = 100000;
    Matrix centers(k, dimension);
    std::size_t placed = 0;
    for (int attempt = 0; placed < k; ++attempt) {
        if (attempt == kMaxAttempts)
            throw Error("could not place " + std::to_string(k) + " blob centres at separation " +
                        std::to_string(separation));
        auto c = centers.row(placed);
        for (double& v : c) v = rng.uniform01() * side;
        bool ok = true;
        for (std::size_t other = 0; other < placed && ok; ++other) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dimension; ++j) {
                const double d = c[j] - centers(other, j);
                d2 += d * d;
            }
            ok = std::sqrt(d2) >= separation;
        }
        if (ok) ++placed;
    }

    const std::size_t n = n_per_class * k;
    Matrix features(n, dimension);
    std::vector<ClassLabel> labels(n);
    std::vector<SampleId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i / n_per_class;
        labels[i] = static_cast<ClassLabel>(c);
        ids[i] = SampleId{i};
        for (std::size_t j = 0; j < dimension; ++j) features(i, j) = centers(c, j) + rng.normal();
    }
    return LabelledDataset(std::move(features), std::move(labels), class_count, std::move(ids));
}

NoiseInjectionRecord inject_noise(std::span<const SampleId> ids, std::span<const ClassLabel> labels,
                                  int class_count, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate < 1.0)) throw Error("noise rate must lie strictly between 0 and 1");
    if (class_count < 2) throw Error("noise injection needs at least two classes");
    if (ids.size() != labels.size()) throw Error("sample ids and labels differ in length");
    const std::size_t n = labels.size();
    const auto flips = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));

    NoiseInjectionRecord rec;
    rec.rate = rate;
    rec.ids.assign(ids.begin(), ids.end());
    rec.original_labels.assign(labels.begin(), labels.end());
    rec.noisy_labels = rec.original_labels;

    Rng rng(seed);
    const auto k = static_cast<std::uint64_t>(class_count);
    for (std::size_t row : rng.sample_without_replacement(n, flips)) {
        const auto old = static_cast<std::uint64_t>(rec.original_labels[row]);
        // Uniform over the K-1 other classes.
        const std::uint64_t r = rng.uniform_below(k - 1);
        rec.noisy_labels[row] = static_cast<ClassLabel>(r < old ? r : r + 1);
        rec.flipped.push_back(rec.ids[row]);
    }
    std::ranges::sort(rec.flipped);
    return rec;
}

DetectionReport evaluate_detection(std::span<const SampleId> flagged, std::span<const SampleId> induced) {
    const std::unordered_set<SampleId> truth(induced.begin(), induced.end());
    const std::unordered_set<SampleId> picked(flagged.begin(), flagged.end());
    DetectionReport r;
    r.induced = truth.size();
    r.flagged = picked.size();
    for (SampleId id : picked)
        if (truth.contains(id)) ++r.overlap;
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(r.overlap, r.flagged);
    r.recall = ratio(r.overlap, r.induced);
    r.accuracy = r.recall;
    return r;
}

std::vector<SampleId> select_seed(std::span<const SampleId> ids, const Matrix& probs, SeedStrategy strategy,
                                  std::size_t size, std::uint64_t seed) {
    if (probs.rows() != ids.size()) throw Error("seed selection: probabilities and ids differ in length");
    if (size > ids.size()) throw Error("seed size exceeds the number of samples");

    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    std::vector<SampleId> out;
    if (strategy == SeedStrategy::random) {
        Rng rng(seed);
        for (std::size_t i : rng.sample_without_replacement(order.size(), size)) out.push_back(ids[order[i]]);
        return out;
    }

    const auto margin = cartography::compute_certainty(probs);
    const bool smallest = strategy == SeedStrategy::decision_boundary;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
        return smallest ? margin[a] < margin[b] : margin[a] > margin[b];
    });
    for (std::size_t i = 0; i < size; ++i) out.push_back(ids[order[i]]);
    return out;
}

std::string to_string(SeedStrategy s) {
    switch (s) {
        case SeedStrategy::random: return "random";
        case SeedStrategy::decision_boundary: return "decision-boundary";
        case SeedStrategy::not_decision_boundary: return "not-decision-boundary";
    }
    return "unknown";
}

SeedStrategy seed_strategy_from_string(const std::string& s) {
    if (s == "random") return SeedStrategy::random;
    if (s == "decision-boundary") return SeedStrategy::decision_boundary;
    if (s == "not-decision-boundary") return SeedStrategy::not_decision_boundary;
    throw Error("unknown seed strategy '" + s + "'");
}

}  // namespace dq::harness
