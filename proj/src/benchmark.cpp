#include "dq/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dq/cartography.hpp"
#include "dq/coreset.hpp"
#include "dq/random.hpp"
#include "dq/stats.hpp"

namespace dq::harness {

void BenchmarkConfig::validate() const {
    if (class_count < 2) throw Error("benchmark needs at least two classes");
    if (pool_per_class == 0 || test_per_class == 0) throw Error("benchmark pool and test splits must be non-empty");
    if (repetitions == 0) throw Error("benchmark needs at least one repetition");
    if (seed_size == 0) throw Error("seed size must be positive");
    const std::size_t pool = pool_per_class * static_cast<std::size_t>(class_count);
    if (seed_size + budget > pool) throw Error("seed size plus budget exceeds the pool size");
    if (bootstrap_size == 0 || bootstrap_size > pool) throw Error("bootstrap size must lie in [1, pool size]");
    if (seed_strategies.empty() || expansions.empty()) throw Error("benchmark grid is empty");
}

const LiftCell& LiftReport::cell(SeedStrategy s, Expansion e) const {
    for (const auto& c : cells)
        if (c.seed_strategy == s && c.expansion == e) return c;
    throw Error("lift report has no cell " + to_string(s) + "/" + to_string(e));
}

namespace {

struct Split {
    LabelledDataset pool;
    LabelledDataset test;
};

Split make_split(const BenchmarkConfig& cfg, std::uint64_t rep_seed) {
    const LabelledDataset all = generate_blobs(cfg.pool_per_class + cfg.test_per_class, cfg.class_count,
                                               cfg.dimension, cfg.separation, derive_seed(rep_seed, {1}));
    // Stratified split: per class, a random test_per_class subset is held out.
    Rng rng(derive_seed(rep_seed, {2}));
    const std::size_t per_class = cfg.pool_per_class + cfg.test_per_class;
    std::vector<SampleId> pool_ids, test_ids;
    const auto ids = all.sample_ids();
    for (std::size_t c = 0; c < static_cast<std::size_t>(cfg.class_count); ++c) {
        std::vector<bool> is_test(per_class, false);
        for (std::size_t i : rng.sample_without_replacement(per_class, cfg.test_per_class)) is_test[i] = true;
        for (std::size_t i = 0; i < per_class; ++i)
            (is_test[i] ? test_ids : pool_ids).push_back(ids[c * per_class + i]);
    }
    return {all.subset(pool_ids), all.subset(test_ids)};
}

double test_accuracy(const probe::ProbeModel& model, const LabelledDataset& test) {
    return model.accuracy(test.features(), test.labels());
}

}  // namespace

LiftReport run_benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();
    LiftReport report;
    report.rows = cfg.seed_strategies;
    report.columns = cfg.expansions;
    report.repetitions = cfg.repetitions;
    for (SeedStrategy s : cfg.seed_strategies)
        for (Expansion e : cfg.expansions) report.cells.push_back({s, e, {}, 0.0, 0.0, 0});

    auto cell_at = [&](std::size_t row, std::size_t col) -> LiftCell& {
        return report.cells[row * cfg.expansions.size() + col];
    };

    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed = derive_seed(cfg.seed, {rep});
        const Split split = make_split(cfg, rep_seed);
        const auto pool_ids = split.pool.sample_ids();

        // Model that ranks the pool by margin for the boundary-based seeds.
        const auto boot_pick = coreset::random_sampling(pool_ids, cfg.bootstrap_size, derive_seed(rep_seed, {3})).selected;
        const auto bootstrap = probe::train_probe(split.pool.subset(boot_pick), cfg.training, derive_seed(rep_seed, {4}));
        const Matrix boot_probs = bootstrap.model.predict_proba(split.pool.features());

        for (std::size_t row = 0; row < cfg.seed_strategies.size(); ++row) {
            const SeedStrategy strategy = cfg.seed_strategies[row];
            const auto tag = static_cast<std::uint64_t>(strategy);
            const auto seed_ids =
                select_seed(pool_ids, boot_probs, strategy, cfg.seed_size, derive_seed(rep_seed, {10, tag}));
            const std::uint64_t train_seed = derive_seed(rep_seed, {20, tag});
            const auto baseline = probe::train_probe(split.pool.subset(seed_ids), cfg.training, train_seed);

            const std::unordered_set<SampleId> seeded(seed_ids.begin(), seed_ids.end());
            std::vector<SampleId> remaining;
            for (SampleId id : pool_ids)
                if (!seeded.contains(id)) remaining.push_back(id);
            const LabelledDataset rest = split.pool.subset(remaining);

            // Baseline model's view of the unlabelled pool.
            const auto margins = cartography::compute_certainty(baseline.model.predict_proba(rest.features()));
            std::vector<SampleId> embed_ids(seed_ids.begin(), seed_ids.end());
            embed_ids.insert(embed_ids.end(), remaining.begin(), remaining.end());
            const EmbeddingMatrix embeddings(embed_ids,
                                             baseline.model.embed(split.pool.subset(embed_ids).features()));

            for (std::size_t col = 0; col < cfg.expansions.size(); ++col) {
                const Expansion expansion = cfg.expansions[col];
                std::vector<SampleId> selected;
                if (expansion != Expansion::baseline && cfg.budget > 0) {
                    coreset::SelectorConfig sel;
                    sel.budget = cfg.budget;
                    switch (expansion) {
                        case Expansion::random:
                            selected = coreset::random_sampling(remaining, cfg.budget,
                                                                derive_seed(rep_seed, {30, tag}))
                                           .selected;
                            break;
                        case Expansion::certainty:
                        case Expansion::certainty_highest:
                            sel.certainty_direction = expansion == Expansion::certainty
                                                          ? coreset::Direction::lowest_first
                                                          : coreset::Direction::highest_first;
                            selected = coreset::certainty_sampling(remaining, margins, remaining, sel).selected;
                            break;
                        case Expansion::coreset:
                            selected = coreset::k_center_greedy(embeddings, seed_ids, remaining, sel).selected;
                            break;
                        case Expansion::baseline: break;
                    }
                }

                double acc;
                std::size_t train_size = seed_ids.size();
                if (selected.empty()) {
                    acc = test_accuracy(baseline.model, split.test);
                } else {
                    std::vector<SampleId> train_ids(seed_ids.begin(), seed_ids.end());
                    train_ids.insert(train_ids.end(), selected.begin(), selected.end());
                    train_size = train_ids.size();
                    const auto retrained = probe::train_probe(split.pool.subset(train_ids), cfg.training, train_seed);
                    acc = test_accuracy(retrained.model, split.test);
                }
                LiftCell& c = cell_at(row, col);
                c.accuracies.push_back(acc);
                c.final_training_size = train_size;
            }
        }
    }

    for (auto& c : report.cells) {
        c.mean = mean(c.accuracies);
        double ss = 0.0;
        for (double a : c.accuracies) ss += (a - c.mean) * (a - c.mean);
        c.stddev = c.accuracies.size() > 1 ? std::sqrt(ss / static_cast<double>(c.accuracies.size() - 1)) : 0.0;
    }
    return report;
}

std::string to_string(Expansion e) {
    switch (e) {
        case Expansion::baseline: return "baseline";
        case Expansion::random: return "random";
        case Expansion::certainty: return "certainty";
        case Expansion::certainty_highest: return "certainty-highest";
        case Expansion::coreset: return "coreset";
    }
    return "unknown";
}

Expansion expansion_from_string(const std::string& s) {
    for (Expansion e : {Expansion::baseline, Expansion::random, Expansion::certainty, Expansion::certainty_highest,
                        Expansion::coreset})
        if (to_string(e) == s) return e;
    throw Error("unknown expansion strategy '" + s + "'");
}

}  // namespace dq::harness
