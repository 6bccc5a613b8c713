#include <doctest.h>

#include <cmath>
#include <limits>

#include "dq/core_types.hpp"
#include "dq/stats.hpp"

using namespace dq;

namespace {

std::vector<SampleId> ids_upto(std::size_t n) {
    std::vector<SampleId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(SampleId{i});
    return ids;
}

}  // namespace

TEST_CASE("dataset rejects invalid construction") {
    const auto f = Matrix::from_rows({{0.0}, {1.0}});
    CHECK_NOTHROW(LabelledDataset(f, {0, 1}, 2, ids_upto(2)));
    CHECK_THROWS_AS(LabelledDataset(f, {0, 2}, 2, ids_upto(2)), Error);
    CHECK_THROWS_AS(LabelledDataset(f, {0, -1}, 2, ids_upto(2)), Error);
    CHECK_THROWS_AS(LabelledDataset(f, {0, 1}, 1, ids_upto(2)), Error);
    CHECK_THROWS_AS(LabelledDataset(f, {0, 1}, 2, {SampleId{4}, SampleId{4}}), Error);
    CHECK_THROWS_AS(LabelledDataset(f, {0}, 2, ids_upto(1)), Error);
    CHECK_THROWS_AS(LabelledDataset(Matrix(0, 1), {}, 2, {}), Error);

    auto bad = f;
    bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(LabelledDataset(bad, {0, 1}, 2, ids_upto(2)), Error);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(LabelledDataset(bad, {0, 1}, 2, ids_upto(2)), Error);
}

TEST_CASE("dataset subset and relabel keep ids aligned") {
    const LabelledDataset ds(Matrix::from_rows({{0.0}, {1.0}, {2.0}}), {0, 1, 0}, 2,
                             {SampleId{10}, SampleId{20}, SampleId{30}});
    CHECK(ds.index_of(SampleId{20}) == 1);
    CHECK_THROWS_AS(ds.index_of(SampleId{99}), Error);

    const SampleId pick[] = {SampleId{30}, SampleId{10}};
    const auto sub = ds.subset(pick);
    REQUIRE(sub.size() == 2);
    CHECK(sub.sample_ids()[0] == SampleId{30});
    CHECK(sub.features()(0, 0) == 2.0);
    CHECK(sub.labels()[1] == 0);

    const auto relabelled = ds.with_labels({1, 1, 1});
    CHECK(relabelled.labels()[0] == 1);
    CHECK(relabelled.features() == ds.features());
}

TEST_CASE("probability history validation") {
    const auto half = Matrix::from_rows({{0.5, 0.5}});

    SUBCASE("one epoch is too few") {
        const auto v = validate_probability_history(ProbabilityHistory({0}, {half}));
        REQUIRE_FALSE(v.ok());
        CHECK(*v.error == HistoryErrorKind::too_few_epochs);
        CHECK(v.message == "E < 2");
    }
    SUBCASE("two symmetric epochs are valid") {
        CHECK(validate_probability_history(ProbabilityHistory({0, 1}, {half, half})).ok());
    }
    SUBCASE("row sum") {
        const auto bad = Matrix::from_rows({{0.5, 0.5}, {0.7, 0.6}});
        const auto v = validate_probability_history(ProbabilityHistory({0, 1}, {bad, bad}));
        REQUIRE_FALSE(v.ok());
        CHECK(*v.error == HistoryErrorKind::row_sum);
        CHECK(v.epoch_position == 0);
        CHECK(v.row == 1);
        CHECK(v.message.find("row-sum 1.3") != std::string::npos);
    }
    SUBCASE("row sum within tolerance") {
        const auto nearly = Matrix::from_rows({{0.5 + 5e-7, 0.5}});
        CHECK(validate_probability_history(ProbabilityHistory({0, 1}, {nearly, nearly})).ok());
        const auto beyond = Matrix::from_rows({{0.5 + 5e-6, 0.5}});
        CHECK_FALSE(validate_probability_history(ProbabilityHistory({0, 1}, {beyond, beyond})).ok());
    }
    SUBCASE("out of range entry is distinct from row sum") {
        const auto neg = Matrix::from_rows({{1.2, -0.2}});
        const auto v = validate_probability_history(ProbabilityHistory({0, 1}, {half, neg}));
        REQUIRE_FALSE(v.ok());
        CHECK(*v.error == HistoryErrorKind::out_of_range);
        CHECK(v.epoch_position == 1);
    }
    SUBCASE("shape mismatch") {
        const auto wide = Matrix::from_rows({{0.2, 0.3, 0.5}});
        const auto v = validate_probability_history(ProbabilityHistory({0, 1}, {half, wide}));
        REQUIRE_FALSE(v.ok());
        CHECK(*v.error == HistoryErrorKind::shape_mismatch);
    }
    SUBCASE("duplicate epoch numbers") {
        const auto v = validate_probability_history(ProbabilityHistory({3, 3}, {half, half}));
        REQUIRE_FALSE(v.ok());
        CHECK(*v.error == HistoryErrorKind::duplicate_epoch);
    }
    SUBCASE("require_valid throws the diagnosis") {
        try {
            require_valid(ProbabilityHistory({0}, {half}));
            FAIL("expected HistoryError");
        } catch (const HistoryError& e) {
            CHECK(*e.validation().error == HistoryErrorKind::too_few_epochs);
        }
    }
}

TEST_CASE("penultimate epoch follows epoch numbers") {
    const auto a = Matrix::from_rows({{1.0, 0.0}});
    const auto b = Matrix::from_rows({{0.0, 1.0}});
    const auto c = Matrix::from_rows({{0.5, 0.5}});
    CHECK(penultimate_epoch(ProbabilityHistory({0, 1, 2}, {a, b, c})) == b);
    CHECK(penultimate_epoch(ProbabilityHistory({3, 7}, {a, b})) == a);
    // Storage order does not matter, only the epoch numbers.
    CHECK(penultimate_epoch(ProbabilityHistory({7, 3, 5}, {a, b, c})) == c);
    CHECK_THROWS_AS(penultimate_epoch(ProbabilityHistory({0}, {a})), HistoryError);

    const ProbabilityHistory h({0, 1, 2}, {a, b, c});
    CHECK(&penultimate_epoch(h) == &penultimate_epoch(h));
    CHECK(h.final_epoch() == c);
}

TEST_CASE("embedding lookup") {
    const EmbeddingMatrix e({SampleId{5}, SampleId{2}}, Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
    CHECK(e.find(SampleId{2}) == std::optional<std::size_t>(1));
    CHECK_FALSE(e.find(SampleId{9}).has_value());
    CHECK(e.row_of(SampleId{5})[1] == 2.0);
    CHECK_THROWS_AS(e.row_of(SampleId{9}), Error);
    CHECK_THROWS_AS(EmbeddingMatrix({SampleId{1}, SampleId{1}}, Matrix(2, 1)), Error);
    CHECK_THROWS_AS(EmbeddingMatrix({SampleId{1}}, Matrix(2, 1)), Error);
}

TEST_CASE("upper percentile") {
    const std::vector<double> ten{0.3, 0.1, 0.9, 0.5, 0.7, 0.2, 0.4, 0.8, 0.6, 1.0};
    CHECK(upper_percentile(ten, 90.0) == 1.0);
    CHECK(upper_percentile(ten, 80.0) == 0.9);
    CHECK(upper_percentile(ten, 50.0) == 0.6);
    CHECK(upper_percentile(ten, 10.0) == 0.2);
    const std::vector<double> one{0.42};
    CHECK(upper_percentile(one, 90.0) == 0.42);
    CHECK(upper_percentile(one, 1.0) == 0.42);

    // Monotone in the percentile.
    double prev = -1.0;
    for (double p = 1.0; p < 100.0; p += 0.5) {
        const double v = upper_percentile(ten, p);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("median and mean") {
    const std::vector<double> odd{3.0, 1.0, 2.0};
    const std::vector<double> even{4.0, 1.0, 3.0, 2.0};
    CHECK(median(odd) == 2.0);
    CHECK(median(even) == 2.5);
    CHECK(mean(even) == 2.5);
}
