#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace tpc {

// Letters are dense integer ids; token<->id mapping is a CLI concern.
using Letter = std::uint32_t;

inline constexpr double kLog2E = 1.4426950408889634074;

// The fixed, named RNG used everywhere. mt19937_64 is pinned by the standard,
// so seeded runs reproduce bit-identically across platforms.
inline constexpr const char* kRngName = "mt19937-64";

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// An i.i.d. source: explicit finite pmf, geometric over the countable
// alphabet, or a caller-supplied countable pmf.
class Source {
  public:
    enum class Kind { finite, geometric, custom };

    static Source finite(std::vector<double> probs, std::uint64_t seed = 0);
    static Source geometric(double ratio, std::uint64_t seed = 0);
    // pmf must describe a proper countable distribution; sampling walks the
    // cumulative sum, so it is only practical for light-tailed pmfs.
    static Source custom(std::string label, std::function<double(Letter)> pmf, std::uint64_t seed = 0);

    static Source from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Kind kind() const { return kind_; }
    std::uint64_t seed() const { return seed_; }
    bool is_finite() const { return kind_ == Kind::finite; }

    // Finite alphabets only.
    std::size_t alphabet_size() const;
    // Number of letters with nonzero probability (finite case only).
    std::size_t support_size() const;

    double pmf(Letter a) const;

    const std::vector<double>& probs() const { return probs_; }
    double ratio() const { return ratio_; }

  private:
    Source() = default;
    void validate() const;

    Kind kind_ = Kind::finite;
    std::vector<double> probs_;             // finite
    std::vector<double> cumulative_;        // finite, for sampling
    double ratio_ = 0.0;                    // geometric
    std::function<double(Letter)> custom_;  // custom
    std::string label_;
    std::uint64_t seed_ = 0;

    friend class Sampler;
};

// Draws i.i.d. letters from a source. Each Sampler owns independent RNG
// state, so replicas can run concurrently.
class Sampler {
  public:
    Sampler(const Source& src, std::uint64_t seed);

    Letter next();

    void fill(std::vector<Letter>& out, std::size_t n);

  private:
    double next_unit();

    const Source* src_;
    std::mt19937_64 rng_;
};

std::vector<Letter> sample_sequence(const Source& src, std::size_t t, std::uint64_t seed);

// Sparse per-letter occurrence counts; total equals the sum of all counts.
class CountTable {
  public:
    void add(Letter a, std::uint64_t n = 1);
    std::uint64_t count(Letter a) const;
    std::uint64_t total() const { return total_; }
    std::size_t distinct() const { return counts_.size(); }

    const std::unordered_map<Letter, std::uint64_t>& entries() const { return counts_; }

  private:
    std::unordered_map<Letter, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

CountTable count(const std::vector<Letter>& seq);

} // namespace tpc
