#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "estimators.hpp"
#include "model.hpp"
#include "redundancy_lab.hpp"

namespace tpc {

// A binary prefix code: explicit codeword table, or a generator rule covering
// the whole countable alphabet. Codewords are '0'/'1' strings; the trie of
// codewords is the code tree that drives the infinite-alphabet predictor.
//
// Generator rules:
//   unary        letter a -> "1"*a + "0"            lengths a+1
//   elias-gamma  letter a -> gamma code of a+1       lengths 2*floor(log2(a+1))+1
//   pow2         letter a -> "1"*a + "0" + padding   lengths 2^(a+1)
// The pow2 rule exists to exercise codes whose expected length diverges under
// light-tailed sources.
class PrefixCode {
  public:
    enum class Rule { table, unary, elias_gamma, pow2 };

    static PrefixCode table(std::vector<std::string> codewords);
    static PrefixCode unary();
    static PrefixCode elias_gamma();
    static PrefixCode pow2();

    // {"rule": "unary"|"elias-gamma"|"pow2"} or {"table": ["0","10",...]}.
    static PrefixCode from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Rule rule() const { return rule_; }
    bool is_generator() const { return rule_ != Rule::table; }
    unsigned channel_arity() const { return 2; }
    // Number of letters the code covers; nullopt for generator rules.
    std::optional<std::size_t> letter_count() const;

    std::string codeword(Letter a) const;
    std::size_t codeword_length(Letter a) const;
    // Length as a double, safe for letters whose pow2 length would overflow
    // an integer; used by the expectation and tail sums.
    double codeword_length_bits(Letter a) const;

    // Code-tree children of the vertex named by `prefix` (a proper prefix of
    // at least one codeword). One entry per channel symbol.
    struct Child {
        enum class Kind { absent, leaf, internal };
        Kind kind = Kind::absent;
        Letter letter = 0;  // valid when kind == leaf
    };
    std::array<Child, 2> children(const std::string& prefix) const;

  private:
    PrefixCode() = default;
    void validate_table() const;

    Rule rule_ = Rule::table;
    std::vector<std::string> codewords_;         // table rule
    std::vector<std::string> sorted_codewords_;  // table rule, for trie lookups
};

struct KraftReport {
    double sum = 0.0;
    bool prefix_free = true;
    std::size_t letters_checked = 0;
    // First offending pair when not prefix-free (shorter word first).
    std::optional<std::pair<Letter, Letter>> violation;
};

KraftReport kraft_check(const PrefixCode& code, std::size_t max_letters);

struct CodeLengthReport {
    double bits = 0.0;        // partial expectation sum
    double tail_mass = 0.0;   // probability mass beyond the letters summed
    std::size_t letters_used = 0;
    bool divergent = false;   // partial sums passed the cap (heuristic)
};

// E_p|c(a)| truncated at tail mass <= tail_eps. Divergence is flagged when
// the partial sums pass `cap` before the tail target is met.
CodeLengthReport expected_codeword_length(const PrefixCode& code, const Source& src, double tail_eps,
                                          double cap = 1000.0);

// Tree-bound evaluation on the code tree, truncated to the letters holding
// all but tail_eps of the source mass. `bits` covers the truncated vertex
// set (with the tail correction folded into each subset probability);
// `remainder_bits` bounds every vertex the truncation dropped, via
// log2(e) * sum over tail letters of p(a)*|c(a)|.
struct CodeTreeBound {
    double bits = 0.0;
    double remainder_bits = 0.0;
    std::size_t letters_used = 0;
};

CodeTreeBound theorem1_code_bound(const PrefixCode& code, const Source& src, std::uint64_t t,
                                  double tail_eps);

// Adaptive predictor on the code tree. Vertices materialize only along
// visited codeword paths; everything else implicitly counts zero, and an
// unvisited sibling subtree behaves as a single symbol with count zero.
class LazyCodeTree final : public SequentialModel {
  public:
    LazyCodeTree(PrefixCode code, AdditiveEstimator estimator);

    double predict(Letter a) const override;
    double predict_log2(Letter a) const override;
    void update(Letter a) override;
    std::uint64_t history_length() const override { return t_; }
    bool finite() const override { return false; }
    std::size_t alphabet_size() const override;
    void begin_walk() override { cursor_ = 0; }
    std::vector<double> branch_probs() const override;
    unsigned branch_toward(Letter a) const override;
    std::optional<Letter> take_branch(unsigned k) override;
    nlohmann::json descriptor() const override;
    std::unique_ptr<SequentialModel> clone() const override;
    std::uint64_t state_hash() const override;

    Rational predict_exact(Letter a) const;

    const PrefixCode& code() const { return code_; }
    std::size_t materialized_nodes() const { return nodes_.size(); }

  private:
    struct Node {
        std::string prefix;
        std::uint64_t count = 0;
        std::array<std::int32_t, 2> child{-1, -1};
        std::array<PrefixCode::Child, 2> kinds;
        unsigned sigma = 0;
    };

    std::int32_t materialize_child(std::int32_t node, unsigned symbol);
    Node make_node(std::string prefix) const;
    template <typename Fn>
    void walk_path(Letter a, Fn&& factor) const;

    PrefixCode code_;
    AdditiveEstimator estimator_;
    std::vector<Node> nodes_;
    std::uint64_t t_ = 0;
    std::int32_t cursor_ = 0;
};

// Monte-Carlo r^t decay table for the code-tree predictor over a countable
// source. Sources whose expected codeword length diverges under the code are
// refused (the first letter could never be transmitted with such a code).
RedundancyReport theorem3_decay(const Source& src, const PrefixCode& code,
                                const AdditiveEstimator& estimator,
                                const std::vector<std::uint64_t>& t_grid, const LabOptions& options);

} // namespace tpc
