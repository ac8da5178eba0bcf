#include "tree_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace tpc {

std::uint32_t PredictorTree::add_node(std::int32_t parent) {
    nodes_.push_back(Node{});
    nodes_.back().parent = parent;
    const auto idx = static_cast<std::uint32_t>(nodes_.size() - 1);
    if (parent >= 0) nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
    return idx;
}

PredictorTree PredictorTree::flat(std::size_t alphabet_size, AdditiveEstimator estimator) {
    require(alphabet_size >= 2, ErrorCode::invalid_argument, "flat tree: alphabet size must be >= 2");
    PredictorTree tree(std::move(estimator));
    tree.root_ = tree.add_node(-1);
    for (std::size_t a = 0; a < alphabet_size; ++a) {
        const auto leaf = tree.add_node(0);
        tree.nodes_[leaf].letter = static_cast<std::int64_t>(a);
    }
    tree.index_leaves();
    tree.descriptor_override_ = nlohmann::json{{"predictor", "flat"},
                                               {"alphabet_size", alphabet_size},
                                               {"estimator", tree.estimator_.name()}};
    return tree;
}

PredictorTree PredictorTree::from_partition(const std::vector<std::vector<Letter>>& groups,
                                            AdditiveEstimator estimator) {
    require(!groups.empty(), ErrorCode::invalid_argument, "partition: no groups");
    PredictorTree tree(std::move(estimator));
    tree.root_ = tree.add_node(-1);
    std::unordered_set<Letter> seen;
    for (const auto& group : groups) {
        require(!group.empty(), ErrorCode::invalid_argument, "partition: empty group");
        for (Letter a : group)
            require(seen.insert(a).second, ErrorCode::invalid_argument,
                    "partition: letter " + std::to_string(a) + " appears in two groups");
        if (group.size() == 1) {
            const auto leaf = tree.add_node(0);
            tree.nodes_[leaf].letter = group[0];
        } else {
            const auto inner = tree.add_node(0);
            for (Letter a : group) {
                const auto leaf = tree.add_node(static_cast<std::int32_t>(inner));
                tree.nodes_[leaf].letter = a;
            }
        }
    }
    tree.index_leaves();
    tree.descriptor_override_ = nlohmann::json{{"predictor", "partition"},
                                               {"groups", groups},
                                               {"estimator", tree.estimator_.name()}};
    return tree;
}

std::uint32_t PredictorTree::build_from_json(const nlohmann::json& node, std::int32_t parent, int depth) {
    require(depth < 64, ErrorCode::parse, "tree spec: nesting deeper than 64");
    require(node.is_object(), ErrorCode::parse, "tree spec: expected an object per vertex");
    const auto idx = add_node(parent);
    if (node.contains("letter")) {
        require(!node.contains("children"), ErrorCode::parse,
                "tree spec: vertex has both \"letter\" and \"children\"");
        nodes_[idx].letter = node["letter"].get<std::int64_t>();
        require(nodes_[idx].letter >= 0, ErrorCode::parse, "tree spec: negative letter id");
        return idx;
    }
    require(node.contains("children") && node["children"].is_array() && !node["children"].empty(),
            ErrorCode::parse, "tree spec: internal vertex needs a nonempty \"children\" array");
    for (const auto& child : node["children"]) build_from_json(child, static_cast<std::int32_t>(idx), depth + 1);
    return idx;
}

PredictorTree PredictorTree::from_json(const nlohmann::json& topology, AdditiveEstimator estimator) {
    PredictorTree tree(std::move(estimator));
    tree.root_ = tree.build_from_json(topology, -1, 0);
    tree.index_leaves();
    return tree;
}

void PredictorTree::index_leaves() {
    std::int64_t max_letter = -1;
    std::size_t leaf_count = 0;
    for (const auto& node : nodes_) {
        if (node.letter >= 0) {
            ++leaf_count;
            max_letter = std::max(max_letter, node.letter);
        }
    }
    require(leaf_count >= 1, ErrorCode::invalid_argument, "tree: no leaves");
    require(max_letter + 1 == static_cast<std::int64_t>(leaf_count), ErrorCode::invalid_argument,
            "tree: leaf letters must be exactly 0.." + std::to_string(leaf_count - 1));
    leaf_of_letter_.assign(leaf_count, -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& node = nodes_[i];
        if (node.letter >= 0) {
            require(node.children.empty(), ErrorCode::invalid_argument, "tree: lettered vertex has children");
            auto& slot = leaf_of_letter_[static_cast<std::size_t>(node.letter)];
            require(slot < 0, ErrorCode::invalid_argument,
                    "tree: letter " + std::to_string(node.letter) + " marks two leaves");
            slot = static_cast<std::int32_t>(i);
        }
    }
}

nlohmann::json PredictorTree::topology_json() const {
    std::vector<nlohmann::json> out(nodes_.size());
    // Children always have larger indices, so a reverse walk is bottom-up.
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const auto& node = nodes_[i];
        if (node.letter >= 0) {
            out[i] = nlohmann::json{{"letter", node.letter}};
        } else {
            nlohmann::json children = nlohmann::json::array();
            for (auto c : node.children) children.push_back(out[c]);
            out[i] = nlohmann::json{{"children", children}};
        }
    }
    return out[root_];
}

std::uint32_t PredictorTree::leaf_for(Letter a) const {
    require(a < leaf_of_letter_.size(), ErrorCode::invalid_argument,
            "tree: unknown letter " + std::to_string(a));
    return static_cast<std::uint32_t>(leaf_of_letter_[a]);
}

void PredictorTree::update(Letter a) {
    for (std::int32_t v = static_cast<std::int32_t>(leaf_for(a)); v >= 0; v = nodes_[v].parent)
        ++nodes_[v].count;
    ++t_;
}

double PredictorTree::predict(Letter a) const {
    double prob = 1.0;
    std::int32_t v = static_cast<std::int32_t>(leaf_for(a));
    while (nodes_[v].parent >= 0) {
        const auto& parent = nodes_[nodes_[v].parent];
        if (parent.children.size() > 1)
            prob *= estimator_.estimate(nodes_[v].count, parent.count, parent.children.size());
        v = nodes_[v].parent;
    }
    return prob;
}

double PredictorTree::predict_log2(Letter a) const {
    double bits = 0.0;
    std::int32_t v = static_cast<std::int32_t>(leaf_for(a));
    while (nodes_[v].parent >= 0) {
        const auto& parent = nodes_[nodes_[v].parent];
        if (parent.children.size() > 1)
            bits += estimator_.log2_estimate(nodes_[v].count, parent.count, parent.children.size());
        v = nodes_[v].parent;
    }
    return bits;
}

Rational PredictorTree::predict_exact(Letter a) const {
    Rational prob = Rational::one();
    std::int32_t v = static_cast<std::int32_t>(leaf_for(a));
    while (nodes_[v].parent >= 0) {
        const auto& parent = nodes_[nodes_[v].parent];
        if (parent.children.size() > 1)
            prob *= estimator_.estimate_exact(nodes_[v].count, parent.count, parent.children.size());
        v = nodes_[v].parent;
    }
    return prob;
}

std::vector<double> PredictorTree::predict_distribution() const {
    std::vector<double> dist(leaf_of_letter_.size());
    for (std::size_t a = 0; a < dist.size(); ++a) dist[a] = predict(static_cast<Letter>(a));
    return dist;
}

std::vector<double> PredictorTree::branch_probs() const {
    const auto& node = nodes_[cursor_];
    std::vector<double> probs(node.children.size());
    for (std::size_t k = 0; k < node.children.size(); ++k)
        probs[k] = estimator_.estimate(nodes_[node.children[k]].count, node.count, node.children.size());
    return probs;
}

unsigned PredictorTree::branch_toward(Letter a) const {
    // Ascend from the leaf until the cursor's child on the path is found.
    std::int32_t v = static_cast<std::int32_t>(leaf_for(a));
    std::int32_t prev = v;
    while (v >= 0 && static_cast<std::uint32_t>(v) != cursor_) {
        prev = v;
        v = nodes_[v].parent;
    }
    require(v >= 0, ErrorCode::invalid_argument, "branch_toward: letter not under cursor");
    const auto& children = nodes_[cursor_].children;
    for (unsigned k = 0; k < children.size(); ++k)
        if (children[k] == static_cast<std::uint32_t>(prev)) return k;
    fail(ErrorCode::invalid_argument, "branch_toward: malformed tree");
}

std::optional<Letter> PredictorTree::take_branch(unsigned k) {
    const auto& children = nodes_[cursor_].children;
    require(k < children.size(), ErrorCode::invalid_argument, "take_branch: branch out of range");
    cursor_ = children[k];
    if (nodes_[cursor_].letter >= 0) return static_cast<Letter>(nodes_[cursor_].letter);
    return std::nullopt;
}

nlohmann::json PredictorTree::descriptor() const {
    if (!descriptor_override_.is_null()) return descriptor_override_;
    return nlohmann::json{{"predictor", "tree"},
                          {"estimator", estimator_.name()},
                          {"tree", topology_json()}};
}

std::unique_ptr<SequentialModel> PredictorTree::clone() const {
    return std::make_unique<PredictorTree>(*this);
}

std::uint64_t PredictorTree::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_mix(h, t_);
    for (const auto& node : nodes_) h = hash_mix(h, node.count);
    return h;
}

std::uint64_t PredictorTree::subset_count(const std::vector<unsigned>& path) const {
    std::uint32_t v = root_;
    for (unsigned k : path) {
        require(k < nodes_[v].children.size(), ErrorCode::invalid_argument, "subset_count: bad path");
        v = nodes_[v].children[k];
    }
    return nodes_[v].count;
}

bool PredictorTree::counts_consistent() const {
    for (const auto& node : nodes_) {
        if (node.children.empty()) continue;
        std::uint64_t sum = 0;
        for (auto c : node.children) sum += nodes_[c].count;
        if (sum != node.count) return false;
    }
    return nodes_[root_].count == t_;
}

Theorem1Bound theorem1_bound(const PredictorTree& tree, const Source& src, std::uint64_t t) {
    // Letter-subset probabilities bottom-up (children have larger indices).
    const auto& nodes = tree.nodes_;
    std::vector<double> subset_prob(nodes.size(), 0.0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
        if (nodes[i].letter >= 0) {
            subset_prob[i] = src.pmf(static_cast<Letter>(nodes[i].letter));
        } else {
            for (auto c : nodes[i].children) subset_prob[i] += subset_prob[c];
        }
    }
    // Paths for reporting.
    std::vector<std::string> path(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& children = nodes[i].children;
        for (std::size_t k = 0; k < children.size(); ++k) {
            path[children[k]] = path[i].empty() ? std::to_string(k) : path[i] + "." + std::to_string(k);
        }
    }

    Theorem1Bound bound;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].children.empty()) continue;  // leaf terms vanish
        const double sigma = static_cast<double>(nodes[i].children.size());
        const double term =
            kLog2E * std::min((sigma - 1.0) / (static_cast<double>(t) + 1.0), subset_prob[i]);
        bound.terms.push_back(PredictorTree::VertexTerm{path[i].empty() ? "root" : path[i],
                                                        nodes[i].children.size(), subset_prob[i], term});
        bound.bits += term;
    }
    return bound;
}

} // namespace tpc
