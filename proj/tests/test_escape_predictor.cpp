#include <doctest.h>

#include <cmath>
#include <random>

#include "escape_predictor.hpp"

using namespace tpc;

namespace {
EscapeModel laplace_escape(std::size_t n) { return EscapeModel(n, AdditiveEstimator::laplace()); }
}

TEST_CASE("escape probabilities after a b a") {
    auto model = laplace_escape(3);
    for (Letter a : {0u, 1u, 0u}) model.update(a);
    // t=3, two seen letters, one unseen
    CHECK(model.predict(0) == doctest::Approx(0.5).epsilon(1e-14));        // 3/6
    CHECK(model.predict(1) == doctest::Approx(1.0 / 3).epsilon(1e-14));    // 2/6
    CHECK(model.predict(2) == doctest::Approx(1.0 / 6).epsilon(1e-14));
}

TEST_CASE("escape with empty history is uniform") {
    auto model = laplace_escape(7);
    for (Letter a = 0; a < 7; ++a) CHECK(model.predict(a) == doctest::Approx(1.0 / 7).epsilon(1e-14));
}

TEST_CASE("escape after a single letter") {
    auto model = laplace_escape(2);
    model.update(0);
    CHECK(model.predict(0) == doctest::Approx(2.0 / 3).epsilon(1e-14));
    CHECK(model.predict(1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("escape bookkeeping") {
    auto model = laplace_escape(4);
    CHECK(model.seen_count() == 0);
    model.update(2);
    CHECK(model.seen_count() == 1);
    CHECK(model.history_length() == 1);
    model.update(2);
    CHECK(model.seen_count() == 1);  // repeats leave the seen set alone
    model.update(0);
    model.update(1);
    model.update(3);
    CHECK(model.seen_count() == 4);
    CHECK(model.unseen_count() == 0);
    CHECK_THROWS_AS(model.update(4), Error);
    CHECK_THROWS_AS(model.predict(4), Error);
}

TEST_CASE("seen set never shrinks") {
    std::mt19937_64 rng(41);
    auto model = laplace_escape(12);
    std::size_t prev = 0;
    for (int i = 0; i < 200; ++i) {
        model.update(rng() % 12);
        CHECK(model.seen_count() >= prev);
        prev = model.seen_count();
    }
}

TEST_CASE("escape distribution normalizes in every reachable state") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 12;
        const bool kt = rng() % 2 == 0;
        EscapeModel model(n, kt ? AdditiveEstimator::krichevsky() : AdditiveEstimator::laplace(), kt);
        const int steps = static_cast<int>(rng() % 30);
        for (int i = 0; i < steps; ++i) model.update(rng() % n);
        double sum = 0.0;
        for (Letter a = 0; a < n; ++a) {
            const double p = model.predict(a);
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("a lone unseen letter carries the whole escape mass") {
    auto model = laplace_escape(5);
    for (Letter a : {0u, 1u, 2u, 3u, 0u, 1u}) model.update(a);
    // t=6, |seen|=4, unseen={4}
    CHECK(model.predict(4) == doctest::Approx(1.0 / (6 + 4 + 1)).epsilon(1e-14));
}

TEST_CASE("seen letters follow the additive rule over |seen|+1 symbols") {
    std::mt19937_64 rng(47);
    auto model = laplace_escape(9);
    for (int i = 0; i < 40; ++i) model.update(rng() % 5);  // keep letters 5..8 unseen
    std::vector<std::uint64_t> counts(9, 0);
    // replay to recover counts
    std::mt19937_64 rng2(47);
    for (int i = 0; i < 40; ++i) ++counts[rng2() % 5];
    const auto laplace = AdditiveEstimator::laplace();
    const std::uint64_t m = model.seen_count();
    for (Letter a = 0; a < 9; ++a) {
        if (counts[a] > 0)
            CHECK(model.predict(a) == doctest::Approx(laplace.estimate(counts[a], 40, m + 1)).epsilon(1e-14));
    }
}

TEST_CASE("all-seen state renormalizes to the plain additive predictor") {
    auto model = laplace_escape(3);
    for (Letter a : {0u, 1u, 2u, 0u}) model.update(a);
    // t=4, every letter seen: (nu+1)/(t+|A|)
    CHECK(model.predict(0) == doctest::Approx(3.0 / 7).epsilon(1e-14));
    CHECK(model.predict(1) == doctest::Approx(2.0 / 7).epsilon(1e-14));
    CHECK(model.predict(2) == doctest::Approx(2.0 / 7).epsilon(1e-14));
}

TEST_CASE("point-mass source drives t*r^t toward the unit bound from below") {
    // With a single ever-seen letter the divergence is deterministic:
    // r^t = log2((t+2)/(t+1)), so t * r^t in nats is t*ln(1+1/(t+1)) < 1.
    for (std::uint64_t t : {10ull, 100ull, 1000ull, 10000ull}) {
        auto model = laplace_escape(64);
        for (std::uint64_t i = 0; i < t; ++i) model.update(7);
        const double r_bits = -std::log2(model.predict(7));  // D(point mass || eta)
        const double t_r_nats = static_cast<double>(t) * r_bits / kLog2E;
        CHECK(t_r_nats < 1.0);
        CHECK(t_r_nats > 0.5);  // and it approaches 1
    }
}

TEST_CASE("theorem2_check reports the asymptotic target") {
    const auto src = Source::finite({0.5, 0.5});
    LabOptions options;
    options.trials = 200;
    options.seed = 9;
    const auto report = theorem2_check(src, 10, {50}, options);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].t == 50);
    REQUIRE(report.rows[0].bound_bits.has_value());
    // min{s, |A|-1} = 2 nats spread over t, reported in bits
    CHECK(*report.rows[0].bound_bits == doctest::Approx(2.0 * kLog2E / 50.0).epsilon(1e-12));
    CHECK(report.rows[0].r_bits > 0.0);
}
