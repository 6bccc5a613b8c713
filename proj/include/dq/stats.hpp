#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "dq/core_types.hpp"

namespace dq {

// Upper nearest-rank percentile: the value v such that exactly
// ceil((100 - p)% of n) elements (plus ties) satisfy x >= v. With p = 90 on
// ten distinct values it is the maximum; on a single value it is that value.
// Raising p never lowers v. Requires a non-empty input and 0 < p < 100.
inline double upper_percentile(std::span<const double> values, double percentile) {
    std::vector<double> sorted(values.begin(), values.end());
    std::ranges::sort(sorted);
    const double n = static_cast<double>(sorted.size());
    // Guard against 0.1 * 10 landing a hair above 1.
    auto take = static_cast<std::size_t>(std::ceil((100.0 - percentile) / 100.0 * n - 1e-9));
    take = std::clamp<std::size_t>(take, 1, sorted.size());
    return sorted[sorted.size() - take];
}

inline double median(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::ranges::sort(sorted);
    const std::size_t n = sorted.size();
    if (n == 0) return 0.0;
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    // Fixed summation order keeps results reproducible.
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

struct ScoredId {
    SampleId id;
    double score = 0.0;
    bool operator==(const ScoredId&) const = default;
};

// Score descending, ties by id ascending.
inline void sort_by_score_desc(std::vector<ScoredId>& items) {
    std::ranges::sort(items, [](const ScoredId& a, const ScoredId& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

}  // namespace dq
