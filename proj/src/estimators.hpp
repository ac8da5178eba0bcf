#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "alphabet.hpp"
#include "rational.hpp"

namespace tpc {

// Additive smoothing rule (nu + delta) / (total + delta * sigma) applied
// per tree node, where sigma is the node's son count.
//
// Named instances: Laplace (delta = 1) and the Krichevsky minimax estimator,
// whose constant is kept as the literal 0.50922 (the published truncation,
// not a higher-precision value).
class AdditiveEstimator {
  public:
    static AdditiveEstimator laplace() { return AdditiveEstimator(1.0, Fraction{1, 1}, "laplace"); }
    static AdditiveEstimator krichevsky() {
        return AdditiveEstimator(0.50922, Fraction{25461, 50000}, "krichevsky");
    }
    static AdditiveEstimator additive(double delta);

    // Parses "laplace" | "krichevsky" | "additive:<delta>".
    static AdditiveEstimator from_name(const std::string& name);
    const std::string& name() const { return name_; }

    double delta() const { return delta_; }

    double estimate(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const;
    double log2_estimate(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const;

    // Exact-fraction variant; available when delta was given as a decimal
    // (always true for the named estimators).
    bool has_exact() const { return exact_.has_value(); }
    Rational estimate_exact(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const;

  private:
    struct Fraction {
        std::int64_t num;
        std::int64_t den;
    };

    AdditiveEstimator(double delta, std::optional<Fraction> exact, std::string name);
    void check_args(std::uint64_t nu, std::uint64_t total, std::uint64_t sigma) const;

    double delta_;
    std::optional<Fraction> exact_;
    std::string name_;
};

// Upper bound on the Laplace predictor's average redundancy over i.i.d.
// sources: (sigma - 1) * log2(e) / (t + 1) bits.
double laplace_bound(std::uint64_t alphabet_size, std::uint64_t t);

// Asymptotic optimum for 2t * r^t under the Krichevsky estimator:
// (sigma - 1) * log2(e).
double krichevsky_asymptote(std::uint64_t alphabet_size);

} // namespace tpc
