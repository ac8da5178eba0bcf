#include "alphabet.hpp"

#include <algorithm>
#include <cmath>

namespace tpc {

namespace {
constexpr double kPmfSumTolerance = 1e-12;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step over seed^stream; used to derive replica substreams.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Source Source::finite(std::vector<double> probs, std::uint64_t seed) {
    Source s;
    s.kind_ = Kind::finite;
    s.probs_ = std::move(probs);
    s.seed_ = seed;
    s.validate();
    s.cumulative_.resize(s.probs_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.probs_.size(); ++i) {
        acc += s.probs_[i];
        s.cumulative_[i] = acc;
    }
    if (!s.cumulative_.empty()) s.cumulative_.back() = 1.0;
    return s;
}

Source Source::geometric(double ratio, std::uint64_t seed) {
    Source s;
    s.kind_ = Kind::geometric;
    s.ratio_ = ratio;
    s.seed_ = seed;
    s.validate();
    return s;
}

Source Source::custom(std::string label, std::function<double(Letter)> pmf, std::uint64_t seed) {
    require(static_cast<bool>(pmf), ErrorCode::invalid_argument, "custom source: null pmf");
    Source s;
    s.kind_ = Kind::custom;
    s.label_ = std::move(label);
    s.custom_ = std::move(pmf);
    s.seed_ = seed;
    return s;
}

void Source::validate() const {
    switch (kind_) {
        case Kind::finite: {
            require(!probs_.empty(), ErrorCode::invalid_argument, "finite source: empty pmf");
            double sum = 0.0;
            for (double p : probs_) {
                require(p >= 0.0 && std::isfinite(p), ErrorCode::invalid_argument,
                        "finite source: negative or non-finite probability");
                sum += p;
            }
            require(std::abs(sum - 1.0) <= kPmfSumTolerance, ErrorCode::invalid_argument,
                    "finite source: pmf sums to " + std::to_string(sum) + ", expected 1");
            break;
        }
        case Kind::geometric:
            require(ratio_ > 0.0 && ratio_ < 1.0, ErrorCode::invalid_argument,
                    "geometric source: ratio must lie strictly in (0,1)");
            break;
        case Kind::custom:
            break;
    }
}

Source Source::from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::parse, "source spec: expected a JSON object");
    const std::string kind = j.value("kind", "");
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    if (kind == "finite") {
        require(j.contains("probs") && j["probs"].is_array(), ErrorCode::parse,
                "source spec: finite kind requires a \"probs\" array");
        return finite(j["probs"].get<std::vector<double>>(), seed);
    }
    if (kind == "geometric") {
        require(j.contains("ratio") && j["ratio"].is_number(), ErrorCode::parse,
                "source spec: geometric kind requires a numeric \"ratio\"");
        return geometric(j["ratio"].get<double>(), seed);
    }
    fail(ErrorCode::parse, "source spec: unknown kind \"" + kind + "\"");
}

nlohmann::json Source::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::finite:
            j["kind"] = "finite";
            j["probs"] = probs_;
            break;
        case Kind::geometric:
            j["kind"] = "geometric";
            j["ratio"] = ratio_;
            break;
        case Kind::custom:
            j["kind"] = "custom";
            j["label"] = label_;
            break;
    }
    j["seed"] = seed_;
    return j;
}

std::size_t Source::alphabet_size() const {
    require(kind_ == Kind::finite, ErrorCode::domain, "alphabet_size: source is not finite");
    return probs_.size();
}

std::size_t Source::support_size() const {
    require(kind_ == Kind::finite, ErrorCode::domain, "support_size: source is not finite");
    std::size_t s = 0;
    for (double p : probs_)
        if (p > 0.0) ++s;
    return s;
}

double Source::pmf(Letter a) const {
    switch (kind_) {
        case Kind::finite:
            require(a < probs_.size(), ErrorCode::invalid_argument,
                    "pmf: letter " + std::to_string(a) + " outside finite alphabet of size " +
                        std::to_string(probs_.size()));
            return probs_[a];
        case Kind::geometric:
            return (1.0 - ratio_) * std::pow(ratio_, static_cast<double>(a));
        case Kind::custom:
            return custom_(a);
    }
    return 0.0;
}

Sampler::Sampler(const Source& src, std::uint64_t seed) : src_(&src), rng_(seed) {}

double Sampler::next_unit() {
    // 53-bit uniform in [0,1); fixed mapping, independent of stdlib
    // distribution internals.
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

Letter Sampler::next() {
    const double u = next_unit();
    switch (src_->kind_) {
        case Source::Kind::finite: {
            const auto& cum = src_->cumulative_;
            auto it = std::upper_bound(cum.begin(), cum.end(), u);
            if (it == cum.end()) --it;
            return static_cast<Letter>(it - cum.begin());
        }
        case Source::Kind::geometric: {
            // Inverse CDF: least k with 1 - ratio^{k+1} > u.
            const double x = std::log1p(-u) / std::log(src_->ratio_);
            double k = std::ceil(x) - 1.0;
            if (k < 0.0) k = 0.0;
            const double cap = static_cast<double>(std::numeric_limits<Letter>::max());
            if (k > cap) k = cap;
            return static_cast<Letter>(k);
        }
        case Source::Kind::custom: {
            double acc = 0.0;
            for (Letter a = 0;; ++a) {
                acc += src_->custom_(a);
                if (u < acc) return a;
                require(a < std::numeric_limits<Letter>::max(), ErrorCode::domain,
                        "custom source: cumulative sum never reached the sample point");
            }
        }
    }
    return 0;
}

void Sampler::fill(std::vector<Letter>& out, std::size_t n) {
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = next();
}

std::vector<Letter> sample_sequence(const Source& src, std::size_t t, std::uint64_t seed) {
    Sampler sampler(src, seed);
    std::vector<Letter> seq;
    sampler.fill(seq, t);
    return seq;
}

void CountTable::add(Letter a, std::uint64_t n) {
    counts_[a] += n;
    total_ += n;
}

std::uint64_t CountTable::count(Letter a) const {
    auto it = counts_.find(a);
    return it == counts_.end() ? 0 : it->second;
}

CountTable count(const std::vector<Letter>& seq) {
    CountTable table;
    for (Letter a : seq) table.add(a);
    return table;
}

} // namespace tpc
