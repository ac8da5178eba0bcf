#include "estimators.hpp"

#include <cmath>
#include <cstdio>

namespace tpc {

AdditiveEstimator::AdditiveEstimator(double delta, std::optional<Fraction> exact, std::string name)
    : delta_(delta), exact_(exact), name_(std::move(name)) {
    require(delta_ > 0.0 && std::isfinite(delta_), ErrorCode::invalid_argument,
            "estimator: delta must be positive and finite");
}

AdditiveEstimator AdditiveEstimator::additive(double delta) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "additive:%.17g", delta);
    return AdditiveEstimator(delta, std::nullopt, buf);
}

AdditiveEstimator AdditiveEstimator::from_name(const std::string& name) {
    if (name == "laplace") return laplace();
    if (name == "krichevsky") return krichevsky();
    const std::string prefix = "additive:";
    if (name.rfind(prefix, 0) == 0) {
        const std::string text = name.substr(prefix.size());
        std::size_t used = 0;
        double delta = 0.0;
        try {
            delta = std::stod(text, &used);
        } catch (const std::exception&) {
            fail(ErrorCode::parse, "estimator: bad delta in \"" + name + "\"");
        }
        require(used == text.size(), ErrorCode::parse, "estimator: bad delta in \"" + name + "\"");
        // Decimal text of the form d.ddd gives an exact fraction too.
        AdditiveEstimator est = additive(delta);
        est.name_ = name;
        auto dot = text.find('.');
        bool digits_only = !text.empty() && text.find_first_not_of("0123456789.") == std::string::npos &&
                           text.find('.', dot == std::string::npos ? 0 : dot + 1) == std::string::npos;
        if (digits_only && text.size() <= 18) {
            std::string scaled = text;
            std::int64_t den = 1;
            if (dot != std::string::npos) {
                const std::size_t frac_digits = text.size() - dot - 1;
                scaled.erase(dot, 1);
                for (std::size_t i = 0; i < frac_digits; ++i) den *= 10;
            }
            est.exact_ = Fraction{std::stoll(scaled), den};
        }
        return est;
    }
    fail(ErrorCode::parse, "estimator: unknown name \"" + name + "\"");
}

void AdditiveEstimator::check_args(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const {
    require(sigma >= 1, ErrorCode::invalid_argument, "estimate: sigma must be at least 1");
    require(nu <= total, ErrorCode::invalid_argument, "estimate: symbol count exceeds total");
}

double AdditiveEstimator::estimate(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const {
    check_args(nu, total, sigma);
    return (static_cast<double>(nu) + delta_) /
           (static_cast<double>(total) + delta_ * static_cast<double>(sigma));
}

double AdditiveEstimator::log2_estimate(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const {
    check_args(nu, total, sigma);
    return std::log2(static_cast<double>(nu) + delta_) -
           std::log2(static_cast<double>(total) + delta_ * static_cast<double>(sigma));
}

Rational AdditiveEstimator::estimate_exact(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const {
    check_args(nu, total, sigma);
    require(exact_.has_value(), ErrorCode::domain,
            "estimate_exact: estimator \"" + name_ + "\" has no exact fraction for delta");
    // (nu*q + p) / (total*q + sigma*p) with delta = p/q.
    const std::int64_t p = exact_->num;
    const std::int64_t q = exact_->den;
    return Rational(static_cast<std::int64_t>(nu) * q + p,
                    static_cast<std::int64_t>(total) * q + static_cast<std::int64_t>(sigma) * p);
}

double laplace_bound(std::uint64_t alphabet_size, std::uint64_t t) {
    require(alphabet_size >= 2, ErrorCode::invalid_argument, "laplace_bound: alphabet size must be >= 2");
    return static_cast<double>(alphabet_size - 1) * kLog2E / (static_cast<double>(t) + 1.0);
}

double krichevsky_asymptote(std::uint64_t alphabet_size) {
    return static_cast<double>(alphabet_size >= 1 ? alphabet_size - 1 : 0) * kLog2E;
}

} // namespace tpc
