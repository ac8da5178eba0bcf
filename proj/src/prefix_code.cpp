#include "prefix_code.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

namespace tpc {

namespace {

// Materialized codewords are capped so a stray huge letter id cannot demand a
// multi-gigabyte string.
constexpr std::size_t kMaxCodewordLength = std::size_t{1} << 22;

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

} // namespace

PrefixCode PrefixCode::table(std::vector<std::string> codewords) {
    PrefixCode code;
    code.rule_ = Rule::table;
    code.codewords_ = std::move(codewords);
    code.validate_table();
    code.sorted_codewords_ = code.codewords_;
    std::sort(code.sorted_codewords_.begin(), code.sorted_codewords_.end());
    return code;
}

PrefixCode PrefixCode::unary() {
    PrefixCode code;
    code.rule_ = Rule::unary;
    return code;
}

PrefixCode PrefixCode::elias_gamma() {
    PrefixCode code;
    code.rule_ = Rule::elias_gamma;
    return code;
}

PrefixCode PrefixCode::pow2() {
    PrefixCode code;
    code.rule_ = Rule::pow2;
    return code;
}

void PrefixCode::validate_table() const {
    require(!codewords_.empty(), ErrorCode::invalid_argument, "prefix code: empty table");
    for (const auto& w : codewords_) {
        require(!w.empty(), ErrorCode::invalid_argument, "prefix code: empty codeword");
        require(w.find_first_not_of("01") == std::string::npos, ErrorCode::invalid_argument,
                "prefix code: codeword \"" + w + "\" has symbols outside the binary channel alphabet");
    }
    // Prefix-freeness is verified by kraft_check; the constructor only
    // rejects duplicates, which break the letter<->codeword bijection.
    auto sorted = codewords_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    require(dup == sorted.end(), ErrorCode::invalid_argument, "prefix code: duplicate codeword");
}

PrefixCode PrefixCode::from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::parse, "code spec: expected a JSON object");
    if (j.contains("table")) {
        require(j["table"].is_array(), ErrorCode::parse, "code spec: \"table\" must be an array");
        return table(j["table"].get<std::vector<std::string>>());
    }
    const std::string rule = j.value("rule", "");
    if (rule == "unary") return unary();
    if (rule == "elias-gamma") return elias_gamma();
    if (rule == "pow2") return pow2();
    fail(ErrorCode::parse, "code spec: unknown rule \"" + rule + "\"");
}

nlohmann::json PrefixCode::to_json() const {
    switch (rule_) {
        case Rule::table:
            return nlohmann::json{{"table", codewords_}};
        case Rule::unary:
            return nlohmann::json{{"rule", "unary"}};
        case Rule::elias_gamma:
            return nlohmann::json{{"rule", "elias-gamma"}};
        case Rule::pow2:
            return nlohmann::json{{"rule", "pow2"}};
    }
    return {};
}

std::optional<std::size_t> PrefixCode::letter_count() const {
    if (rule_ == Rule::table) return codewords_.size();
    return std::nullopt;
}

std::size_t PrefixCode::codeword_length(Letter a) const {
    switch (rule_) {
        case Rule::table:
            require(a < codewords_.size(), ErrorCode::invalid_argument,
                    "prefix code: letter " + std::to_string(a) + " beyond table of size " +
                        std::to_string(codewords_.size()));
            return codewords_[a].size();
        case Rule::unary:
            return static_cast<std::size_t>(a) + 1;
        case Rule::elias_gamma: {
            const unsigned width = std::bit_width(static_cast<std::uint64_t>(a) + 1);
            return 2 * static_cast<std::size_t>(width) - 1;
        }
        case Rule::pow2: {
            require(a < 63, ErrorCode::domain, "pow2 code: letter too large");
            return std::size_t{1} << (a + 1);
        }
    }
    return 0;
}

double PrefixCode::codeword_length_bits(Letter a) const {
    if (rule_ == Rule::pow2) return std::ldexp(1.0, static_cast<int>(std::min<Letter>(a, 1020)) + 1);
    return static_cast<double>(codeword_length(a));
}

std::string PrefixCode::codeword(Letter a) const {
    const std::size_t len = codeword_length(a);
    require(len <= kMaxCodewordLength, ErrorCode::domain,
            "prefix code: codeword for letter " + std::to_string(a) + " too long to materialize");
    switch (rule_) {
        case Rule::table:
            return codewords_[a];
        case Rule::unary:
            return std::string(a, '1') + '0';
        case Rule::elias_gamma: {
            const std::uint64_t n = static_cast<std::uint64_t>(a) + 1;
            const unsigned width = std::bit_width(n);
            std::string w(width - 1, '0');
            for (unsigned i = width; i-- > 0;) w.push_back((n >> i) & 1 ? '1' : '0');
            return w;
        }
        case Rule::pow2: {
            std::string w(a, '1');
            w.push_back('0');
            w.resize(len, '0');
            return w;
        }
    }
    return {};
}

std::array<PrefixCode::Child, 2> PrefixCode::children(const std::string& prefix) const {
    std::array<Child, 2> out;
    switch (rule_) {
        case Rule::table: {
            for (unsigned sym = 0; sym < 2; ++sym) {
                const std::string candidate = prefix + static_cast<char>('0' + sym);
                auto it = std::lower_bound(sorted_codewords_.begin(), sorted_codewords_.end(), candidate);
                if (it == sorted_codewords_.end() || !starts_with(*it, candidate)) continue;
                if (*it == candidate) {
                    auto pos = std::find(codewords_.begin(), codewords_.end(), candidate);
                    out[sym] = Child{Child::Kind::leaf, static_cast<Letter>(pos - codewords_.begin())};
                } else {
                    out[sym] = Child{Child::Kind::internal, 0};
                }
            }
            return out;
        }
        case Rule::unary: {
            // Valid internal vertices are runs of '1'.
            require(prefix.find_first_not_of('1') == std::string::npos, ErrorCode::invalid_argument,
                    "unary code tree: vertex \"" + prefix + "\" does not exist");
            out[0] = Child{Child::Kind::leaf, static_cast<Letter>(prefix.size())};
            out[1] = Child{Child::Kind::internal, 0};
            return out;
        }
        case Rule::elias_gamma: {
            const std::size_t one = prefix.find('1');
            if (one == std::string::npos) {
                // 0^z: '1' completes the single-bit code only at the root.
                const std::size_t z = prefix.size();
                out[0] = Child{Child::Kind::internal, 0};
                out[1] = z == 0 ? Child{Child::Kind::leaf, 0} : Child{Child::Kind::internal, 0};
                return out;
            }
            const std::size_t z = one;                          // zeros before the leading 1
            const std::size_t got = prefix.size() - one - 1;    // payload bits collected
            require(got < z, ErrorCode::invalid_argument,
                    "gamma code tree: vertex \"" + prefix + "\" is not internal");
            std::uint64_t value = 1;
            for (std::size_t i = one + 1; i < prefix.size(); ++i) value = (value << 1) | (prefix[i] == '1');
            for (unsigned sym = 0; sym < 2; ++sym) {
                if (got + 1 == z) {
                    const std::uint64_t n = (value << 1) | sym;
                    out[sym] = Child{Child::Kind::leaf, static_cast<Letter>(n - 1)};
                } else {
                    out[sym] = Child{Child::Kind::internal, 0};
                }
            }
            return out;
        }
        case Rule::pow2: {
            const std::size_t zero = prefix.find('0');
            if (zero == std::string::npos) {
                // 1^k: '0' starts letter k's zero padding, '1' leads to larger letters.
                out[0] = Child{Child::Kind::internal, 0};
                out[1] = Child{Child::Kind::internal, 0};
                // Letter k's codeword is 1^k 0 0^(2^(k+1)-k-1); the padding is
                // never empty, so '0' is always internal here.
                return out;
            }
            const std::size_t k = zero;  // letter id being padded
            require(prefix.find('1', zero) == std::string::npos, ErrorCode::invalid_argument,
                    "pow2 code tree: vertex \"" + prefix + "\" does not exist");
            const std::size_t target = codeword_length(static_cast<Letter>(k));
            require(prefix.size() < target, ErrorCode::invalid_argument,
                    "pow2 code tree: vertex \"" + prefix + "\" is not internal");
            out[0] = prefix.size() + 1 == target ? Child{Child::Kind::leaf, static_cast<Letter>(k)}
                                                 : Child{Child::Kind::internal, 0};
            out[1] = Child{Child::Kind::absent, 0};
            return out;
        }
    }
    return out;
}

KraftReport kraft_check(const PrefixCode& code, std::size_t max_letters) {
    require(max_letters >= 1, ErrorCode::invalid_argument, "kraft_check: need at least one letter");
    std::size_t n = max_letters;
    if (auto count = code.letter_count()) n = std::min(n, *count);

    KraftReport report;
    report.letters_checked = n;
    std::vector<std::pair<std::string, Letter>> words;
    words.reserve(n);
    for (Letter a = 0; a < n; ++a) {
        words.emplace_back(code.codeword(a), a);
        report.sum += std::ldexp(1.0, -static_cast<int>(code.codeword_length(a)));
    }
    std::sort(words.begin(), words.end());
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
        if (starts_with(words[i + 1].first, words[i].first)) {
            report.prefix_free = false;
            report.violation = {words[i].second, words[i + 1].second};
            break;
        }
    }
    if (report.prefix_free && report.sum > 1.0 + 1e-12) report.prefix_free = false;
    return report;
}

CodeLengthReport expected_codeword_length(const PrefixCode& code, const Source& src, double tail_eps,
                                          double cap) {
    CodeLengthReport report;
    if (src.is_finite()) {
        const std::size_t n = src.alphabet_size();
        for (Letter a = 0; a < n; ++a) {
            const double p = src.pmf(a);
            if (p > 0.0) report.bits += p * code.codeword_length_bits(a);
        }
        report.letters_used = n;
        return report;
    }

    constexpr std::size_t kLetterCap = 1 << 20;
    constexpr double kNegligibleTerm = 1e-16;
    double mass = 0.0;
    Letter a = 0;
    for (; a < kLetterCap; ++a) {
        const double p = src.pmf(a);
        const double term = p > 0.0 ? p * code.codeword_length_bits(a) : 0.0;
        if (1.0 - mass <= tail_eps && term < kNegligibleTerm) break;
        report.bits += term;
        mass += p;
        if (report.bits > cap) {
            report.divergent = true;
            ++a;
            break;
        }
    }
    report.letters_used = a;
    report.tail_mass = std::max(0.0, 1.0 - mass);
    if (a >= kLetterCap && report.tail_mass > tail_eps) report.divergent = true;
    return report;
}

CodeTreeBound theorem1_code_bound(const PrefixCode& code, const Source& src, std::uint64_t t,
                                  double tail_eps) {
    // Letters kept: enough to push the tail below tail_eps.
    std::size_t keep = 0;
    double mass = 0.0;
    if (src.is_finite()) {
        keep = src.alphabet_size();
        mass = 1.0;
    } else {
        constexpr std::size_t kLetterCap = 1 << 20;
        while (keep < kLetterCap && 1.0 - mass > tail_eps) {
            mass += src.pmf(static_cast<Letter>(keep));
            ++keep;
        }
        require(1.0 - mass <= tail_eps, ErrorCode::domain,
                "code bound: source tail did not fall below tail_eps within the letter cap");
    }
    const double tail = std::max(0.0, 1.0 - mass);

    // Mass reaching each internal vertex on the kept letters' paths.
    std::unordered_map<std::string, double> vertex_mass;
    for (Letter a = 0; a < keep; ++a) {
        const double p = src.pmf(a);
        if (p <= 0.0) continue;
        const std::string w = code.codeword(a);
        std::string prefix;
        vertex_mass[prefix] += p;
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            prefix.push_back(w[i]);
            vertex_mass[prefix] += p;
        }
    }
    if (vertex_mass.empty()) vertex_mass[""] = 0.0;

    CodeTreeBound bound;
    bound.letters_used = keep;
    for (const auto& [prefix, p_hat] : vertex_mass) {
        const auto kids = code.children(prefix);
        unsigned sigma = 0;
        for (const auto& kid : kids)
            if (kid.kind != PrefixCode::Child::Kind::absent) ++sigma;
        // Tail letters may pass through this vertex too; p_hat + tail is a
        // safe overestimate of the true subset probability.
        const double term = std::min((static_cast<double>(sigma) - 1.0) / (static_cast<double>(t) + 1.0),
                                     p_hat + tail);
        bound.bits += kLog2E * term;
    }

    // Every vertex dropped by the truncation lies on some tail letter's path.
    if (!src.is_finite()) {
        constexpr std::size_t kLetterCap = 1 << 21;
        double remainder = 0.0;
        for (std::size_t a = keep; a < kLetterCap; ++a) {
            const double p = src.pmf(static_cast<Letter>(a));
            const double term = p > 0.0 ? p * code.codeword_length_bits(static_cast<Letter>(a)) : 0.0;
            remainder += term;
            if (term < 1e-18) break;
        }
        bound.remainder_bits = kLog2E * remainder;
    }
    return bound;
}

// ---------------------------------------------------------------------------

LazyCodeTree::LazyCodeTree(PrefixCode code, AdditiveEstimator estimator)
    : code_(std::move(code)), estimator_(std::move(estimator)) {
    nodes_.push_back(make_node(""));
}

LazyCodeTree::Node LazyCodeTree::make_node(std::string prefix) const {
    Node node;
    node.prefix = std::move(prefix);
    node.kinds = code_.children(node.prefix);
    for (const auto& kid : node.kinds)
        if (kid.kind != PrefixCode::Child::Kind::absent) ++node.sigma;
    return node;
}

std::size_t LazyCodeTree::alphabet_size() const {
    if (auto n = code_.letter_count()) return *n;
    fail(ErrorCode::domain, "code tree: countable alphabet has no size");
}

std::int32_t LazyCodeTree::materialize_child(std::int32_t node, unsigned symbol) {
    std::int32_t slot = nodes_[node].child[symbol];
    if (slot < 0) {
        require(nodes_[node].kinds[symbol].kind != PrefixCode::Child::Kind::absent, ErrorCode::decode,
                "code tree: descent into an absent subtree");
        std::string prefix = nodes_[node].prefix + static_cast<char>('0' + symbol);
        const bool leaf = nodes_[node].kinds[symbol].kind == PrefixCode::Child::Kind::leaf;
        Node child;
        if (leaf) {
            child.prefix = std::move(prefix);  // leaves need no child classification
        } else {
            child = make_node(std::move(prefix));
        }
        // push_back may reallocate; write the slot only afterwards.
        nodes_.push_back(std::move(child));
        slot = static_cast<std::int32_t>(nodes_.size() - 1);
        nodes_[node].child[symbol] = slot;
    }
    return slot;
}

void LazyCodeTree::update(Letter a) {
    const std::string w = code_.codeword(a);
    std::int32_t v = 0;
    ++nodes_[0].count;
    for (char c : w) {
        v = materialize_child(v, static_cast<unsigned>(c - '0'));
        ++nodes_[v].count;
    }
    ++t_;
}

// Walks letter a's codeword path, reporting every branching vertex to
// `factor(child_count, node_count, sigma)`. Unmaterialized stretches carry
// zero counts; their fan-out still comes from the code shape.
template <typename Fn>
void LazyCodeTree::walk_path(Letter a, Fn&& factor) const {
    const std::string w = code_.codeword(a);
    std::int32_t v = 0;
    std::string prefix;
    bool materialized = true;
    std::uint64_t node_count = nodes_[0].count;
    for (char c : w) {
        const unsigned sym = static_cast<unsigned>(c - '0');
        unsigned sigma;
        std::uint64_t child_count = 0;
        std::int32_t next = -1;
        if (materialized) {
            sigma = nodes_[v].sigma;
            next = nodes_[v].child[sym];
            if (next >= 0) child_count = nodes_[next].count;
        } else {
            const auto kids = code_.children(prefix);
            sigma = 0;
            for (const auto& kid : kids)
                if (kid.kind != PrefixCode::Child::Kind::absent) ++sigma;
        }
        if (sigma > 1) factor(child_count, node_count, sigma);
        prefix.push_back(c);
        if (materialized && next >= 0) {
            v = next;
            node_count = nodes_[v].count;
        } else {
            materialized = false;
            node_count = 0;
        }
    }
}

double LazyCodeTree::predict(Letter a) const {
    double prob = 1.0;
    walk_path(a, [&](std::uint64_t nu, std::uint64_t total, unsigned sigma) {
        prob *= estimator_.estimate(nu, total, sigma);
    });
    return prob;
}

double LazyCodeTree::predict_log2(Letter a) const {
    double bits = 0.0;
    walk_path(a, [&](std::uint64_t nu, std::uint64_t total, unsigned sigma) {
        bits += estimator_.log2_estimate(nu, total, sigma);
    });
    return bits;
}

Rational LazyCodeTree::predict_exact(Letter a) const {
    Rational prob = Rational::one();
    walk_path(a, [&](std::uint64_t nu, std::uint64_t total, unsigned sigma) {
        prob *= estimator_.estimate_exact(nu, total, sigma);
    });
    return prob;
}

std::vector<double> LazyCodeTree::branch_probs() const {
    const Node& node = nodes_[cursor_];
    std::vector<double> probs;
    probs.reserve(node.sigma);
    for (unsigned sym = 0; sym < 2; ++sym) {
        if (node.kinds[sym].kind == PrefixCode::Child::Kind::absent) continue;
        const std::int32_t child = node.child[sym];
        const std::uint64_t nu = child >= 0 ? nodes_[child].count : 0;
        probs.push_back(estimator_.estimate(nu, node.count, node.sigma));
    }
    return probs;
}

unsigned LazyCodeTree::branch_toward(Letter a) const {
    const Node& node = nodes_[cursor_];
    const std::string w = code_.codeword(a);
    require(w.size() > node.prefix.size() && starts_with(w, node.prefix), ErrorCode::invalid_argument,
            "code tree walk: letter not under the cursor vertex");
    const unsigned sym = static_cast<unsigned>(w[node.prefix.size()] - '0');
    unsigned index = 0;
    for (unsigned s = 0; s < sym; ++s)
        if (node.kinds[s].kind != PrefixCode::Child::Kind::absent) ++index;
    return index;
}

std::optional<Letter> LazyCodeTree::take_branch(unsigned k) {
    Node& node = nodes_[cursor_];
    unsigned index = 0;
    for (unsigned sym = 0; sym < 2; ++sym) {
        if (node.kinds[sym].kind == PrefixCode::Child::Kind::absent) continue;
        if (index++ != k) continue;
        const auto kind = node.kinds[sym];
        cursor_ = materialize_child(cursor_, sym);
        if (kind.kind == PrefixCode::Child::Kind::leaf) return kind.letter;
        return std::nullopt;
    }
    fail(ErrorCode::decode, "code tree walk: branch out of range");
}

nlohmann::json LazyCodeTree::descriptor() const {
    return nlohmann::json{{"predictor", "code-tree"},
                          {"estimator", estimator_.name()},
                          {"code", code_.to_json()}};
}

std::unique_ptr<SequentialModel> LazyCodeTree::clone() const {
    return std::make_unique<LazyCodeTree>(*this);
}

std::uint64_t LazyCodeTree::state_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = hash_mix(h, t_);
    for (const auto& node : nodes_) {
        h = hash_mix(h, node.count);
        for (char c : node.prefix) h = hash_mix(h, static_cast<std::uint64_t>(c));
    }
    return h;
}

RedundancyReport theorem3_decay(const Source& src, const PrefixCode& code,
                                const AdditiveEstimator& estimator,
                                const std::vector<std::uint64_t>& t_grid, const LabOptions& options) {
    const auto length = expected_codeword_length(code, src, options.tail_eps);
    require(!length.divergent, ErrorCode::domain,
            "theorem3_decay: expected codeword length diverges for this source/code pair");
    nlohmann::json spec{{"predictor", "code-tree"}, {"code", code.to_json()}, {"estimator", estimator.name()}};
    return average_redundancy(spec, src, t_grid, options);
}

} // namespace tpc
