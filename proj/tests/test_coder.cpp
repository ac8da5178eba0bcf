#include <doctest.h>

#include <cmath>
#include <random>

#include "coder.hpp"
#include "escape_predictor.hpp"
#include "prefix_code.hpp"
#include "tree_predictor.hpp"

using namespace tpc;

namespace {

nlohmann::json flat_spec(std::size_t n, const std::string& estimator = "laplace") {
    return nlohmann::json{{"predictor", "flat"}, {"alphabet_size", n}, {"estimator", estimator}};
}

EncodeResult encode_spec(const nlohmann::json& spec, const std::vector<Letter>& seq) {
    auto model = model_from_json(spec);
    return encode(*model, seq);
}

std::vector<Letter> decode_all(const EncodeResult& result) {
    return decode(result.stream.data(), result.stream.size()).letters;
}

} // namespace

TEST_CASE("empty sequence gives a header-only stream") {
    const auto result = encode_spec(flat_spec(3), {});
    CHECK(result.payload_bits == 0);
    CHECK(result.ideal_bits == 0.0);
    const auto info = stream_info(result.stream.data(), result.stream.size());
    CHECK(info.symbol_count == 0);
    CHECK(info.payload_bytes == 0);
    CHECK(decode_all(result).empty());
}

TEST_CASE("five-letter example: ideal length and payload budget") {
    // Sequential Laplace probabilities 1/3, 1/4, 2/5, 3/6, 4/7 multiply to
    // 1/105, so the ideal length is log2(105).
    const std::vector<Letter> seq{0, 2, 0, 0, 0};
    const auto result = encode_spec(flat_spec(3), seq);
    CHECK(result.ideal_bits == doctest::Approx(std::log2(105.0)).epsilon(1e-12));
    CHECK(result.ideal_bits == doctest::Approx(6.7142455).epsilon(1e-6));
    CHECK(result.payload_bits <= 9);
    const double gap = static_cast<double>(result.payload_bits) - result.ideal_bits;
    CHECK(gap >= -1e-9);
    CHECK(gap <= 2.0);
    CHECK(decode_all(result) == seq);
}

TEST_CASE("round trips across predictor families") {
    std::mt19937_64 rng(67);
    const auto gamma = nlohmann::json{{"rule", "elias-gamma"}};
    const auto unary = nlohmann::json{{"rule", "unary"}};
    for (int trial = 0; trial < 60; ++trial) {
        nlohmann::json spec;
        std::size_t letter_space = 0;
        switch (trial % 4) {
            case 0:
                spec = flat_spec(2 + rng() % 7, (trial % 8 < 4) ? "laplace" : "krichevsky");
                letter_space = spec["alphabet_size"].get<std::size_t>();
                break;
            case 1: {
                const std::size_t n = 3 + rng() % 5;
                std::vector<std::vector<Letter>> groups(2);
                for (Letter a = 0; a < n; ++a) groups[a % 2].push_back(a);
                spec = nlohmann::json{{"predictor", "partition"}, {"groups", groups}};
                letter_space = n;
                break;
            }
            case 2:
                spec = nlohmann::json{{"predictor", trial % 8 < 4 ? "escape" : "escape-kt"},
                                      {"alphabet_size", 4 + rng() % 60}};
                letter_space = spec["alphabet_size"].get<std::size_t>();
                break;
            case 3:
                spec = nlohmann::json{{"predictor", "code-tree"}, {"code", trial % 8 < 4 ? unary : gamma}};
                letter_space = 20;
                break;
        }
        const std::size_t t = rng() % 300;
        std::vector<Letter> seq(t);
        for (auto& a : seq) a = rng() % letter_space;

        const auto result = encode_spec(spec, seq);
        CHECK(decode_all(result) == seq);
        const double gap = static_cast<double>(result.payload_bits) - result.ideal_bits;
        CHECK(gap >= -1e-9);
        CHECK(gap <= 2.0);
    }
}

TEST_CASE("encoder and decoder models stay in lockstep") {
    std::mt19937_64 rng(71);
    const auto spec = nlohmann::json{{"predictor", "escape"}, {"alphabet_size", 12}};
    std::vector<Letter> seq(80);
    for (auto& a : seq) a = rng() % 12;

    auto enc_model = model_from_json(spec);
    BitWriter writer;
    ArithmeticEncoder enc(writer);
    auto dec_model = model_from_json(spec);
    std::vector<std::uint64_t> enc_hashes;
    for (Letter a : seq) {
        enc_model->begin_walk();
        for (;;) {
            const auto probs = enc_model->branch_probs();
            const unsigned k = enc_model->branch_toward(a);
            enc.encode_branch(probs, k);
            if (enc_model->take_branch(k)) break;
        }
        enc_model->update(a);
        enc_hashes.push_back(enc_model->state_hash());
    }
    enc.finish();

    BitReader reader(writer.bytes().data(), writer.bytes().size());
    ArithmeticDecoder dec(reader);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        dec_model->begin_walk();
        std::optional<Letter> letter;
        for (;;) {
            const auto probs = dec_model->branch_probs();
            const unsigned k = dec.decode_branch(probs);
            letter = dec_model->take_branch(k);
            if (letter) break;
        }
        CHECK(*letter == seq[i]);
        dec_model->update(*letter);
        CHECK(dec_model->state_hash() == enc_hashes[i]);
    }
}

TEST_CASE("thousand-letter geometric stream through the unary code tree") {
    const auto seq = sample_sequence(Source::geometric(0.5), 1000, 321);
    const auto spec =
        nlohmann::json{{"predictor", "code-tree"}, {"code", nlohmann::json{{"rule", "unary"}}}};
    const auto result = encode_spec(spec, seq);
    CHECK(decode_all(result) == seq);
    const double gap = static_cast<double>(result.payload_bits) - result.ideal_bits;
    CHECK(gap >= -1e-9);
    CHECK(gap <= 2.0);
}

TEST_CASE("long uniform input compresses to the entropy rate") {
    const auto src = Source::finite({0.25, 0.25, 0.25, 0.25});
    const auto seq = sample_sequence(src, 10000, 123);
    const auto result = encode_spec(flat_spec(4), seq);
    const double bits_per_symbol = static_cast<double>(result.payload_bits) / 10000.0;
    CHECK(bits_per_symbol >= 2.0);
    CHECK(bits_per_symbol <= 2.01);
    const double gap = static_cast<double>(result.payload_bits) - result.ideal_bits;
    CHECK(gap >= -1e-9);
    CHECK(gap <= 2.0);
    CHECK(decode_all(result) == seq);
}

TEST_CASE("stream corruption is reported, not misdecoded") {
    std::mt19937_64 rng(73);
    std::vector<Letter> seq(200);
    for (auto& a : seq) a = rng() % 5;
    const auto result = encode_spec(flat_spec(5), seq);
    const auto& stream = result.stream;

    SUBCASE("bad magic") {
        auto bad = stream;
        bad[0] = 'X';
        CHECK_THROWS_AS(decode(bad.data(), bad.size()), Error);
    }
    SUBCASE("bad version") {
        auto bad = stream;
        bad[4] = 99;
        CHECK_THROWS_AS(decode(bad.data(), bad.size()), Error);
    }
    SUBCASE("descriptor cut short") {
        CHECK_THROWS_AS(decode(stream.data(), 12), Error);
    }
    SUBCASE("mangled descriptor JSON") {
        auto bad = stream;
        bad[9] = '#';
        CHECK_THROWS_AS(decode(bad.data(), bad.size()), Error);
    }
    SUBCASE("payload truncated") {
        auto bad = stream;
        REQUIRE(stream_info(stream.data(), stream.size()).payload_bytes > 12);
        bad.resize(bad.size() - 12);
        CHECK_THROWS_AS(decode(bad.data(), bad.size()), Error);
    }
    SUBCASE("payload missing entirely") {
        auto bad = stream;
        bad.resize(bad.size() - stream_info(stream.data(), stream.size()).payload_bytes);
        CHECK_THROWS_AS(decode(bad.data(), bad.size()), Error);
    }
}

TEST_CASE("encoding a letter outside the model alphabet fails") {
    auto model = model_from_json(flat_spec(3));
    CHECK_THROWS_AS(encode(*model, {0, 1, 7}), Error);
}

TEST_CASE("a certain symbol stream costs zero payload bits") {
    const auto spec =
        nlohmann::json{{"predictor", "code-tree"}, {"code", nlohmann::json{{"table", {"0"}}}}};
    const auto result = encode_spec(spec, {0, 0, 0, 0});
    CHECK(result.payload_bits == 0);
    CHECK(result.ideal_bits == 0.0);
    CHECK(decode_all(result) == std::vector<Letter>{0, 0, 0, 0});
}

TEST_CASE("descriptor override carries side data into the header") {
    auto model = model_from_json(flat_spec(2));
    nlohmann::json desc = model->descriptor();
    desc["dictionary"] = {"yes", "no"};
    const auto result = encode(*model, {0, 1, 1}, &desc);
    const auto decoded = decode(result.stream.data(), result.stream.size());
    CHECK(decoded.letters == std::vector<Letter>{0, 1, 1});
    CHECK(decoded.descriptor["dictionary"][1] == "no");
}
