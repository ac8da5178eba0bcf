#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "alphabet.hpp"
#include "rational.hpp"

namespace tpc {

// A sequential predictor that also exposes its root-to-leaf branch structure
// so the arithmetic coder can code one node decision at a time. The walk
// cursor belongs to the model; encoder and decoder drive identical walks, so
// their model states stay in lockstep.
class SequentialModel {
  public:
    virtual ~SequentialModel() = default;

    // P*(x_{t+1} = a) given everything observed so far. Strictly positive for
    // every letter the model covers.
    virtual double predict(Letter a) const = 0;
    // log2 P*(x_{t+1} = a), summed along the path so deep trees cannot
    // underflow the linear-domain product.
    virtual double predict_log2(Letter a) const { return std::log2(predict(a)); }
    virtual void update(Letter a) = 0;
    virtual std::uint64_t history_length() const = 0;

    // Finite models can enumerate their alphabet; countable ones cannot.
    virtual bool finite() const = 0;
    virtual std::size_t alphabet_size() const = 0;  // finite models only

    // --- coding walk -------------------------------------------------------
    // begin_walk() parks the cursor at the root. At each internal node,
    // branch_probs() gives the per-son conditional distribution (sums to 1),
    // branch_toward(a) names the son whose subtree holds `a`, and
    // take_branch(k) descends, returning the letter when a leaf is reached.
    virtual void begin_walk() = 0;
    virtual std::vector<double> branch_probs() const = 0;
    virtual unsigned branch_toward(Letter a) const = 0;
    virtual std::optional<Letter> take_branch(unsigned k) = 0;

    // Self-describing config: model_from_json(descriptor()) rebuilds a fresh
    // model of the same configuration. Descriptors carry no counts; a decoder
    // recovers state by replaying updates on the decoded symbols.
    virtual nlohmann::json descriptor() const = 0;

    virtual std::unique_ptr<SequentialModel> clone() const = 0;

    // Order-independent digest of the mutable state (counts and t); used by
    // tests to prove encoder/decoder lockstep.
    virtual std::uint64_t state_hash() const = 0;
};

// FNV-1a accumulation helper for state_hash implementations.
inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Builds a model from its JSON descriptor. Defined in model_factory.cpp.
std::unique_ptr<SequentialModel> model_from_json(const nlohmann::json& descriptor);

} // namespace tpc
