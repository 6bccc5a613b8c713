#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dq/harness.hpp"
#include "dq/probe.hpp"

namespace dq::harness {

enum class Expansion { baseline, random, certainty, certainty_highest, coreset };

// Probe settings for 100-200 sample training sets: small batches so each
// epoch makes progress before the early-stop check.
inline probe::TrainingConfig desk_training() {
    probe::TrainingConfig t;
    t.hidden_units = 32;
    t.learning_rate = 0.3;
    t.batch_size = 10;
    return t;
}

struct BenchmarkConfig {
    // Synthetic data: pool to draw seeds/expansions from plus a held-out test split.
    std::size_t pool_per_class = 500;
    std::size_t test_per_class = 250;
    int class_count = 4;
    // Overlapping clusters in 16-D: the seed-only probe stays well below
    // ceiling and coverage of the pool matters.
    std::size_t dimension = 16;
    double separation = 1.25;

    std::size_t seed_size = 100;
    std::size_t budget = 30;
    std::size_t repetitions = 10;
    // Random subset used to train the model that ranks the pool by margin for
    // the decision-boundary seed strategies.
    std::size_t bootstrap_size = 200;
    std::uint64_t seed = 0;

    probe::TrainingConfig training = desk_training();

    std::vector<SeedStrategy> seed_strategies{SeedStrategy::random, SeedStrategy::decision_boundary,
                                              SeedStrategy::not_decision_boundary};
    std::vector<Expansion> expansions{Expansion::baseline, Expansion::random, Expansion::certainty,
                                      Expansion::certainty_highest, Expansion::coreset};

    void validate() const;
};

struct LiftCell {
    SeedStrategy seed_strategy;
    Expansion expansion;
    std::vector<double> accuracies;  // one per repetition, in repetition order
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t final_training_size = 0;

    bool operator==(const LiftCell&) const = default;
};

struct LiftReport {
    std::vector<SeedStrategy> rows;
    std::vector<Expansion> columns;
    std::vector<LiftCell> cells;  // row-major
    std::size_t repetitions = 0;

    const LiftCell& cell(SeedStrategy s, Expansion e) const;
    bool operator==(const LiftReport&) const = default;
};

LiftReport run_benchmark(const BenchmarkConfig& config);

std::string to_string(Expansion e);
Expansion expansion_from_string(const std::string& s);

}  // namespace dq::harness
