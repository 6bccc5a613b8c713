#pragma once

// Batch selection of samples to annotate under a fixed budget.
//
// k_center_greedy repeatedly takes the pool point farthest from everything
// chosen so far (initial labelled set plus earlier picks). The first picks
// are the well-spread "cores"; the budget caps the sequence. On an empty
// initial set this is the classic 2-approximation to minimum k-center.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dq/core_types.hpp"

namespace dq::coreset {

enum class Distance { euclidean, cosine };
enum class Direction { lowest_first, highest_first };
enum class Strategy { random, certainty, coreset };

struct SelectorConfig {
    std::size_t budget = 1;
    Distance distance = Distance::euclidean;
    Direction certainty_direction = Direction::lowest_first;
};

struct SelectionResult {
    std::vector<SampleId> selected;
    // Max distance from any pool/initial point to its nearest chosen point.
    // Only known when embeddings were available.
    std::optional<double> coverage_radius;
    Strategy strategy = Strategy::random;

    bool operator==(const SelectionResult&) const = default;
};

double distance(std::span<const double> a, std::span<const double> b, Distance metric);

SelectionResult k_center_greedy(const EmbeddingMatrix& embeddings, std::span<const SampleId> initial,
                                std::span<const SampleId> pool, const SelectorConfig& config);

// delta_ids/delta give the certainty score of each pool member.
SelectionResult certainty_sampling(std::span<const SampleId> delta_ids, std::span<const double> delta,
                                   std::span<const SampleId> pool, const SelectorConfig& config);

SelectionResult random_sampling(std::span<const SampleId> pool, std::size_t budget, std::uint64_t seed);

// max over `all` of the distance to the nearest member of `chosen`.
double coverage_radius(const EmbeddingMatrix& embeddings, std::span<const SampleId> chosen,
                       std::span<const SampleId> all, Distance metric = Distance::euclidean);

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
std::string to_string(Distance d);
Distance distance_from_string(const std::string& s);
std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

}  // namespace dq::coreset
