#include "escape_predictor.hpp"

#include <algorithm>

namespace tpc {

EscapeModel::EscapeModel(std::size_t alphabet_size, AdditiveEstimator estimator, bool krichevsky_variant)
    : estimator_(std::move(estimator)), krichevsky_variant_(krichevsky_variant) {
    require(alphabet_size >= 2, ErrorCode::invalid_argument, "escape: alphabet size must be >= 2");
    counts_.assign(alphabet_size, 0);
}

void EscapeModel::check_letter(Letter a) const {
    require(a < counts_.size(), ErrorCode::invalid_argument,
            "escape: letter " + std::to_string(a) + " outside alphabet of size " +
                std::to_string(counts_.size()));
}

double EscapeModel::root_estimate(std::uint64_t nu) const {
    // Root vertex has |seen| sons plus the escape son when anything is unseen.
    const std::uint64_t sigma = seen_.size() + (unseen_count() > 0 ? 1 : 0);
    return estimator_.estimate(nu, t_, std::max<std::uint64_t>(sigma, 1));
}

double EscapeModel::predict(Letter a) const {
    check_letter(a);
    const std::size_t unseen = unseen_count();
    if (unseen == 0)
        return estimator_.estimate(counts_[a], t_, counts_.size());
    if (counts_[a] > 0)
        return root_estimate(counts_[a]);
    return root_estimate(0) / static_cast<double>(unseen);
}

void EscapeModel::update(Letter a) {
    check_letter(a);
    if (counts_[a] == 0) seen_.insert(std::lower_bound(seen_.begin(), seen_.end(), a), a);
    ++counts_[a];
    ++t_;
}

void EscapeModel::begin_walk() { cursor_depth_ = 0; }

std::vector<double> EscapeModel::branch_probs() const {
    const std::size_t unseen = unseen_count();
    if (cursor_depth_ == 1) {
        // Escape vertex: all-zero counts split uniformly regardless of delta.
        return std::vector<double>(unseen, 1.0 / static_cast<double>(unseen));
    }
    if (unseen == 0) {
        std::vector<double> probs(counts_.size());
        for (std::size_t a = 0; a < counts_.size(); ++a)
            probs[a] = estimator_.estimate(counts_[a], t_, counts_.size());
        return probs;
    }
    std::vector<double> probs(seen_.size() + 1);
    for (std::size_t k = 0; k < seen_.size(); ++k) probs[k] = root_estimate(counts_[seen_[k]]);
    probs[seen_.size()] = root_estimate(0);
    return probs;
}

unsigned EscapeModel::branch_toward(Letter a) const {
    check_letter(a);
    const std::size_t unseen = unseen_count();
    if (cursor_depth_ == 1) {
        // Rank of `a` among unseen letters in id order.
        require(counts_[a] == 0, ErrorCode::invalid_argument, "escape walk: seen letter under escape vertex");
        unsigned rank = 0;
        for (Letter b = 0; b < a; ++b)
            if (counts_[b] == 0) ++rank;
        return rank;
    }
    if (unseen == 0) return a;
    if (counts_[a] > 0) {
        auto it = std::lower_bound(seen_.begin(), seen_.end(), a);
        return static_cast<unsigned>(it - seen_.begin());
    }
    return static_cast<unsigned>(seen_.size());  // escape son
}

std::optional<Letter> EscapeModel::take_branch(unsigned k) {
    const std::size_t unseen = unseen_count();
    if (cursor_depth_ == 1) {
        require(k < unseen, ErrorCode::decode, "escape walk: branch out of range");
        unsigned rank = 0;
        for (Letter a = 0; a < counts_.size(); ++a) {
            if (counts_[a] == 0 && rank++ == k) return a;
        }
        fail(ErrorCode::decode, "escape walk: unseen rank not found");
    }
    if (unseen == 0) {
        require(k < counts_.size(), ErrorCode::decode, "escape walk: branch out of range");
        return static_cast<Letter>(k);
    }
    require(k <= seen_.size(), ErrorCode::decode, "escape walk: branch out of range");
    if (k < seen_.size()) return seen_[k];
    cursor_depth_ = 1;
    return std::nullopt;
}

nlohmann::json EscapeModel::descriptor() const {
    nlohmann::json j;
    j["predictor"] = krichevsky_variant_ ? "escape-kt" : "escape";
    j["alphabet_size"] = counts_.size();
    j["estimator"] = estimator_.name();
    return j;
}

std::unique_ptr<SequentialModel> EscapeModel::clone() const { return std::make_unique<EscapeModel>(*this); }

std::uint64_t EscapeModel::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_mix(h, t_);
    for (auto c : counts_) h = hash_mix(h, c);
    return h;
}

RedundancyReport theorem2_check(const Source& src, std::size_t alphabet_size,
                                const std::vector<std::uint64_t>& t_grid, const LabOptions& options,
                                bool krichevsky_variant) {
    require(src.is_finite(), ErrorCode::domain, "theorem2_check: needs a finite source");
    require(src.alphabet_size() <= alphabet_size, ErrorCode::invalid_argument,
            "theorem2_check: source support extends past the predictor alphabet");
    nlohmann::json spec{{"predictor", krichevsky_variant ? "escape-kt" : "escape"},
                        {"alphabet_size", alphabet_size}};
    return average_redundancy(spec, src, t_grid, options);
}

} // namespace tpc
