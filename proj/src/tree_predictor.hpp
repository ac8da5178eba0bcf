#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "estimators.hpp"
#include "model.hpp"

namespace tpc {

struct Theorem1Bound;

// Rooted prediction tree: leaves carry distinct letters, every vertex holds
// the occurrence count of its letter subset, and the probability of a letter
// is the product of per-node conditional estimates along its root-to-leaf
// path. Topology is fixed at build time; only counts mutate.
class PredictorTree final : public SequentialModel {
  public:
    // Root with `alphabet_size` leaf sons; equivalent to the common additive
    // predictor over the whole alphabet.
    static PredictorTree flat(std::size_t alphabet_size, AdditiveEstimator estimator);

    // Depth-2 tree from a partition of the alphabet. Singleton groups become
    // direct leaves of the root.
    static PredictorTree from_partition(const std::vector<std::vector<Letter>>& groups,
                                        AdditiveEstimator estimator);

    // Arbitrary topology: {"letter": id} for leaves, {"children": [...]} for
    // internal vertices.
    static PredictorTree from_json(const nlohmann::json& topology, AdditiveEstimator estimator);

    nlohmann::json topology_json() const;

    // SequentialModel surface.
    double predict(Letter a) const override;
    double predict_log2(Letter a) const override;
    void update(Letter a) override;
    std::uint64_t history_length() const override { return t_; }
    bool finite() const override { return true; }
    std::size_t alphabet_size() const override { return leaf_of_letter_.size(); }
    void begin_walk() override { cursor_ = root_; }
    std::vector<double> branch_probs() const override;
    unsigned branch_toward(Letter a) const override;
    std::optional<Letter> take_branch(unsigned k) override;
    nlohmann::json descriptor() const override;
    std::unique_ptr<SequentialModel> clone() const override;
    std::uint64_t state_hash() const override;

    // Exact-fraction prediction for golden tests and the rational mode.
    Rational predict_exact(Letter a) const;

    std::vector<double> predict_distribution() const;

    const AdditiveEstimator& estimator() const { return estimator_; }

    // Occurrence count of the letter subset under the vertex reached by
    // `path` (son indices from the root; empty path = root).
    std::uint64_t subset_count(const std::vector<unsigned>& path) const;

    // Checks that every internal count equals the sum of its sons' counts.
    bool counts_consistent() const;

    struct VertexTerm {
        std::string path;     // son indices from the root, e.g. "0.2"
        std::uint64_t sigma;  // son count
        double subset_prob;   // p(A_lambda)
        double term_bits;     // log2(e) * min{(sigma-1)/(t+1), p(A_lambda)}
    };

    friend Theorem1Bound theorem1_bound(const PredictorTree&, const Source&, std::uint64_t);

  private:
    struct Node {
        std::int32_t parent = -1;
        std::vector<std::uint32_t> children;
        std::int64_t letter = -1;  // >= 0 for leaves
        std::uint64_t count = 0;
    };

    PredictorTree(AdditiveEstimator estimator) : estimator_(std::move(estimator)) {}

    std::uint32_t add_node(std::int32_t parent);
    void index_leaves();
    std::uint32_t leaf_for(Letter a) const;
    std::uint32_t build_from_json(const nlohmann::json& node, std::int32_t parent, int depth);

    AdditiveEstimator estimator_;
    std::vector<Node> nodes_;
    std::vector<std::int32_t> leaf_of_letter_;  // letter id -> node index
    std::uint32_t root_ = 0;
    std::uint64_t t_ = 0;
    std::uint32_t cursor_ = 0;
    // flat()/from_partition() record their compact form here so stream
    // headers round-trip the way the model was specified.
    nlohmann::json descriptor_override_;
};

// Theorem-style redundancy bound for a fixed tree against a known source:
// log2(e) * sum over internal vertices of min{(sigma-1)/(t+1), p(A_lambda)}.
struct Theorem1Bound {
    double bits = 0.0;
    std::vector<PredictorTree::VertexTerm> terms;
};

Theorem1Bound theorem1_bound(const PredictorTree& tree, const Source& src, std::uint64_t t);

} // namespace tpc
