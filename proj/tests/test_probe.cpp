#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "dq/harness.hpp"
#include "dq/probe.hpp"

using namespace dq;
using namespace dq::probe;

TEST_CASE("well separated blobs are learned") {
    const auto ds = harness::generate_blobs(100, 2, 2, 10.0, 4);
    const auto r = train_probe(ds, {}, 5);
    CHECK(r.training_accuracy.back() >= 0.99);
    CHECK(r.model.accuracy(ds.features(), ds.labels()) >= 0.99);
}

TEST_CASE("history is one valid snapshot per completed epoch") {
    const auto ds = harness::generate_blobs(30, 3, 4, 3.0, 1);
    TrainingConfig c;
    c.max_epochs = 8;
    c.min_delta = -1.0;  // never stop early
    const auto r = train_probe(ds, c, 2);
    CHECK(validate_probability_history(r.history).ok());
    CHECK(r.history.epoch_count() == 8);
    CHECK(r.training_accuracy.size() == 8);
    CHECK_FALSE(r.stopped_early);
    const auto epochs = r.history.epochs();
    for (std::size_t i = 0; i < epochs.size(); ++i) CHECK(epochs[i] == static_cast<int>(i));
    // Snapshots are evaluation-mode predictions of the model after each epoch.
    CHECK(r.history.final_epoch() == r.model.predict_proba(ds.features()));
    CHECK(r.training_accuracy.back() == r.model.accuracy(ds.features(), ds.labels()));
    CHECK(r.embeddings.values().cols() == c.hidden_units);
    CHECK(r.embeddings.values() == r.model.embed(ds.features()));
    CHECK(r.embeddings.size() == ds.size());
}

TEST_CASE("zero learning rate leaves predictions unchanged") {
    const auto ds = harness::generate_blobs(20, 2, 2, 3.0, 6);
    TrainingConfig c;
    c.learning_rate = 0.0;
    const auto r = train_probe(ds, c, 7);
    REQUIRE(r.history.epoch_count() >= 2);
    for (const auto& m : r.history.matrices()) CHECK(m == r.history.matrices()[0]);
    // No accuracy gain, so training stops at the first allowed check.
    CHECK(r.history.epoch_count() == 2);
    CHECK(r.stopped_early);
}

TEST_CASE("same seed gives a bit-identical history") {
    const auto ds = harness::generate_blobs(40, 3, 2, 2.0, 8);
    const auto a = train_probe(ds, {}, 9);
    const auto b = train_probe(ds, {}, 9);
    const auto c = train_probe(ds, {}, 10);
    CHECK(a.history == b.history);
    CHECK(a.embeddings.values() == b.embeddings.values());
    CHECK_FALSE(a.history.matrices()[0] == c.history.matrices()[0]);
}

TEST_CASE("early stopping follows the training-accuracy gain") {
    const auto ds = harness::generate_blobs(50, 4, 2, 2.5, 3);
    const auto r = train_probe(ds, {}, 4);
    const auto& acc = r.training_accuracy;
    REQUIRE(acc.size() >= 2);
    // Every epoch before the last improved by at least min_delta.
    for (std::size_t e = 1; e + 1 < acc.size(); ++e) CHECK(acc[e] - acc[e - 1] >= 0.001);
    if (r.stopped_early) CHECK(acc.back() - acc[acc.size() - 2] < 0.001);
}

TEST_CASE("divergence is reported with the epoch") {
    const auto ds = harness::generate_blobs(20, 2, 2, 3.0, 1);
    TrainingConfig c;
    c.learning_rate = std::numeric_limits<double>::infinity();
    try {
        train_probe(ds, c, 1);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("invalid training requests") {
    const auto ds = harness::generate_blobs(1, 3, 2, 3.0, 1);
    CHECK_NOTHROW(train_probe(ds, {}, 1));
    const auto tiny = ds.subset(std::vector<SampleId>{SampleId{0}, SampleId{1}});
    CHECK_THROWS_AS(train_probe(tiny, {}, 1), Error);
    TrainingConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(train_probe(ds, c, 1), Error);
}

TEST_CASE("model outputs are distributions") {
    ProbeModel m(3, 5, 4, 11);
    Matrix x(6, 3);
    std::iota(x.data().begin(), x.data().end(), -8.0);
    m.fit_scaler(x);
    const auto p = m.predict_proba(x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0;
        for (double v : p.row(i)) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0));
    }
    const auto hidden = m.embed(x);
    for (double h : hidden.data()) CHECK(std::abs(h) <= 1.0);
}
