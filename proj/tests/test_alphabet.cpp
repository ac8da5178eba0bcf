#include <doctest.h>

#include <random>

#include "alphabet.hpp"

using namespace tpc;

TEST_CASE("finite source validation") {
    CHECK_NOTHROW(Source::finite({0.5, 0.5}));
    CHECK_NOTHROW(Source::finite({0.2, 0.8}));
    CHECK_THROWS_AS(Source::finite({0.5, 0.6}), Error);
    CHECK_THROWS_AS(Source::finite({1.5, -0.5}), Error);
    CHECK_THROWS_AS(Source::finite({}), Error);
    CHECK_THROWS_AS(Source::geometric(0.0), Error);
    CHECK_THROWS_AS(Source::geometric(1.0), Error);
    CHECK_THROWS_AS(Source::geometric(1.7), Error);
}

TEST_CASE("pmf lookups") {
    const auto table = Source::finite({0.2, 0.8});
    CHECK(table.pmf(1) == doctest::Approx(0.8));
    CHECK_THROWS_AS(table.pmf(2), Error);

    const auto geo = Source::geometric(0.5);
    CHECK(geo.pmf(0) == doctest::Approx(0.5));   // p(a_1) = 1/2
    CHECK(geo.pmf(1) == doctest::Approx(0.25));  // p(a_2) = 1/4
    CHECK(geo.pmf(3) == doctest::Approx(0.0625));
}

TEST_CASE("finite pmf sums to one") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 10;
        std::vector<double> w(n);
        double sum = 0.0;
        for (auto& x : w) {
            x = 1.0 + static_cast<double>(rng() % 1000);
            sum += x;
        }
        for (auto& x : w) x /= sum;
        // Renormalize the rounding residue into the final entry.
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) acc += w[i];
        w[n - 1] = 1.0 - acc;
        const auto src = Source::finite(w);
        double total = 0.0;
        for (Letter a = 0; a < n; ++a) total += src.pmf(a);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sampling basics") {
    const auto point = Source::finite({1.0});
    CHECK(sample_sequence(point, 5, 42) == std::vector<Letter>{0, 0, 0, 0, 0});

    const auto fair = Source::finite({0.5, 0.5});
    CHECK(sample_sequence(fair, 0, 42).empty());
}

TEST_CASE("sampling is reproducible") {
    const auto src = Source::finite({0.1, 0.2, 0.3, 0.4});
    const auto a = sample_sequence(src, 1000, 99);
    const auto b = sample_sequence(src, 1000, 99);
    const auto c = sample_sequence(src, 1000, 100);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("geometric sampler matches its pmf in the large") {
    const auto src = Source::geometric(0.5);
    const auto seq = sample_sequence(src, 100000, 2024);
    std::size_t zeros = 0;
    for (Letter a : seq)
        if (a == 0) ++zeros;
    const double freq = static_cast<double>(zeros) / static_cast<double>(seq.size());
    CHECK(freq == doctest::Approx(0.5).epsilon(0.02));  // 0.5 +- 0.01 absolute
    CHECK(std::abs(freq - 0.5) < 0.01);
}

TEST_CASE("counting") {
    const auto table = count({0, 2, 0, 0});
    CHECK(table.total() == 4);
    CHECK(table.count(0) == 3);
    CHECK(table.count(2) == 1);
    CHECK(table.count(1) == 0);  // absent letters read zero
    CHECK(table.distinct() == 2);

    CHECK(count({}).total() == 0);

    // a_3 a_1 a_5 a_5 a_2 a_5 a_4 a_2 a_3 with letters a_k -> id k-1
    const auto nine = count({2, 0, 4, 4, 1, 4, 3, 1, 2});
    CHECK(nine.total() == 9);
    CHECK(nine.count(2) == 2);
    CHECK(nine.count(0) == 1);
    CHECK(nine.count(4) == 3);
    CHECK(nine.count(1) == 2);
    CHECK(nine.count(3) == 1);
}

TEST_CASE("count total equals sequence length") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = rng() % 500;
        std::vector<Letter> seq(len);
        for (auto& a : seq) a = static_cast<Letter>(rng() % 64);
        CHECK(count(seq).total() == len);
    }
}

TEST_CASE("source JSON round trip") {
    const auto geo = Source::from_json(nlohmann::json{{"kind", "geometric"}, {"ratio", 0.5}, {"seed", 7}});
    CHECK(geo.kind() == Source::Kind::geometric);
    CHECK(geo.seed() == 7);
    const auto again = Source::from_json(geo.to_json());
    CHECK(again.pmf(3) == doctest::Approx(geo.pmf(3)));

    const auto fin = Source::from_json(nlohmann::json{{"kind", "finite"}, {"probs", {0.25, 0.75}}});
    CHECK(fin.alphabet_size() == 2);
    CHECK(fin.support_size() == 2);

    CHECK_THROWS_AS(Source::from_json(nlohmann::json{{"kind", "nope"}}), Error);
    CHECK_THROWS_AS(Source::from_json(nlohmann::json{{"kind", "finite"}}), Error);
}

TEST_CASE("custom countable source") {
    // Same law as geometric(1/2), expressed as a raw pmf function.
    const auto src = Source::custom("halving", [](Letter a) { return std::pow(0.5, a + 1); });
    CHECK(src.pmf(2) == doctest::Approx(0.125));
    const auto seq = sample_sequence(src, 2000, 5);
    std::size_t zeros = 0;
    for (Letter a : seq)
        if (a == 0) ++zeros;
    CHECK(static_cast<double>(zeros) / 2000.0 == doctest::Approx(0.5).epsilon(0.1));
}
