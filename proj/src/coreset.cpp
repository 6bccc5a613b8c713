#include "dq/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "dq/random.hpp"

namespace dq::coreset {

double distance(std::span<const double> a, std::span<const double> b, Distance metric) {
    if (metric == Distance::euclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

namespace {

std::vector<SampleId> sorted_unique(std::span<const SampleId> ids, const char* what) {
    std::vector<SampleId> out(ids.begin(), ids.end());
    std::ranges::sort(out);
    if (std::ranges::adjacent_find(out) != out.end())
        throw Error(std::string(what) + " contains duplicate sample ids");
    return out;
}

void require_budget(std::size_t budget) {
    if (budget == 0) throw Error("selection budget must be at least 1");
}

}  // namespace

SelectionResult k_center_greedy(const EmbeddingMatrix& embeddings, std::span<const SampleId> initial,
                                std::span<const SampleId> pool, const SelectorConfig& config) {
    require_budget(config.budget);
    const auto pool_ids = sorted_unique(pool, "pool");
    const auto initial_ids = sorted_unique(initial, "initial set");
    {
        std::unordered_set<SampleId> init(initial_ids.begin(), initial_ids.end());
        for (SampleId id : pool_ids)
            if (init.contains(id))
                throw Error("sample " + std::to_string(id.value) + " is in both the pool and the initial set");
    }

    std::vector<std::span<const double>> pool_rows;
    pool_rows.reserve(pool_ids.size());
    for (SampleId id : pool_ids) pool_rows.push_back(embeddings.row_of(id));

    std::vector<double> nearest(pool_ids.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> picked(pool_ids.size(), false);
    auto absorb = [&](std::span<const double> center) {
        for (std::size_t p = 0; p < pool_ids.size(); ++p)
            nearest[p] = std::min(nearest[p], distance(pool_rows[p], center, config.distance));
    };
    for (SampleId id : initial_ids) absorb(embeddings.row_of(id));

    SelectionResult result;
    result.strategy = Strategy::coreset;
    const std::size_t rounds = std::min(config.budget, pool_ids.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        // Pool is id-sorted and the comparison is strict, so ties go to the
        // lowest id; with nothing chosen yet every distance is +inf and the
        // lowest id starts the sequence.
        std::size_t best = pool_ids.size();
        for (std::size_t p = 0; p < pool_ids.size(); ++p) {
            if (picked[p]) continue;
            if (best == pool_ids.size() || nearest[p] > nearest[best]) best = p;
        }
        picked[best] = true;
        result.selected.push_back(pool_ids[best]);
        absorb(pool_rows[best]);
    }

    double radius = 0.0;
    if (!initial_ids.empty() || !result.selected.empty())
        for (double d : nearest) radius = std::max(radius, d);
    result.coverage_radius = radius;
    return result;
}

SelectionResult certainty_sampling(std::span<const SampleId> delta_ids, std::span<const double> delta,
                                   std::span<const SampleId> pool, const SelectorConfig& config) {
    require_budget(config.budget);
    if (delta_ids.size() != delta.size()) throw Error("certainty ids and scores differ in length");
    std::unordered_map<SampleId, double> score;
    for (std::size_t i = 0; i < delta_ids.size(); ++i) score.emplace(delta_ids[i], delta[i]);

    struct Entry {
        SampleId id;
        double delta;
    };
    std::vector<Entry> entries;
    for (SampleId id : sorted_unique(pool, "pool")) {
        auto it = score.find(id);
        if (it == score.end()) throw Error("no certainty score for pool sample " + std::to_string(id.value));
        entries.push_back({id, it->second});
    }
    const bool lowest = config.certainty_direction == Direction::lowest_first;
    std::ranges::stable_sort(entries, [lowest](const Entry& a, const Entry& b) {
        return lowest ? a.delta < b.delta : a.delta > b.delta;
    });

    SelectionResult result;
    result.strategy = Strategy::certainty;
    const std::size_t take = std::min(config.budget, entries.size());
    for (std::size_t i = 0; i < take; ++i) result.selected.push_back(entries[i].id);
    return result;
}

SelectionResult random_sampling(std::span<const SampleId> pool, std::size_t budget, std::uint64_t seed) {
    require_budget(budget);
    const auto ids = sorted_unique(pool, "pool");
    Rng rng(seed);
    SelectionResult result;
    result.strategy = Strategy::random;
    for (std::size_t i : rng.sample_without_replacement(ids.size(), budget)) result.selected.push_back(ids[i]);
    return result;
}

double coverage_radius(const EmbeddingMatrix& embeddings, std::span<const SampleId> chosen,
                       std::span<const SampleId> all, Distance metric) {
    if (chosen.empty()) throw Error("coverage radius needs at least one chosen sample");
    std::vector<std::span<const double>> centers;
    centers.reserve(chosen.size());
    for (SampleId id : chosen) centers.push_back(embeddings.row_of(id));
    double radius = 0.0;
    for (SampleId id : all) {
        const auto x = embeddings.row_of(id);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) nearest = std::min(nearest, distance(x, c, metric));
        radius = std::max(radius, nearest);
    }
    return radius;
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::random: return "random";
        case Strategy::certainty: return "certainty";
        case Strategy::coreset: return "coreset";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "random") return Strategy::random;
    if (s == "certainty") return Strategy::certainty;
    if (s == "coreset") return Strategy::coreset;
    throw Error("unknown selection strategy '" + s + "'");
}

std::string to_string(Distance d) { return d == Distance::euclidean ? "euclidean" : "cosine"; }

Distance distance_from_string(const std::string& s) {
    if (s == "euclidean") return Distance::euclidean;
    if (s == "cosine") return Distance::cosine;
    throw Error("unknown distance '" + s + "'");
}

std::string to_string(Direction d) { return d == Direction::lowest_first ? "lowest-first" : "highest-first"; }

Direction direction_from_string(const std::string& s) {
    if (s == "lowest-first") return Direction::lowest_first;
    if (s == "highest-first") return Direction::highest_first;
    throw Error("unknown certainty direction '" + s + "'");
}

}  // namespace dq::coreset
