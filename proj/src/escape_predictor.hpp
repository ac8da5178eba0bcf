#pragma once

#include <cstdint>
#include <vector>

#include "estimators.hpp"
#include "model.hpp"
#include "redundancy_lab.hpp"

namespace tpc {

// Unknown-support predictor over a finite alphabet of known size: every
// already-seen letter is a direct son of the root, and all never-seen letters
// share one escape son whose mass is split uniformly among them. The implied
// tree is re-derived from the counts each step, so the topology follows the
// history.
//
// With the Laplace estimator this is
//   (nu(a)+1)/(t+m+1)            if nu(a) > 0,   m = #seen letters
//   1/((t+m+1) * u)              if nu(a) = 0,   u = #unseen letters
// Swapping in the Krichevsky estimator gives the variant with delta smoothing
// at the root. Once every letter has been seen the escape son disappears and
// the model renormalizes to the plain additive predictor over the whole
// alphabet (the two-case formula leaves its escape mass unassigned there).
class EscapeModel final : public SequentialModel {
  public:
    EscapeModel(std::size_t alphabet_size, AdditiveEstimator estimator, bool krichevsky_variant = false);

    double predict(Letter a) const override;
    void update(Letter a) override;
    std::uint64_t history_length() const override { return t_; }
    bool finite() const override { return true; }
    std::size_t alphabet_size() const override { return counts_.size(); }
    void begin_walk() override;
    std::vector<double> branch_probs() const override;
    unsigned branch_toward(Letter a) const override;
    std::optional<Letter> take_branch(unsigned k) override;
    nlohmann::json descriptor() const override;
    std::unique_ptr<SequentialModel> clone() const override;
    std::uint64_t state_hash() const override;

    std::size_t seen_count() const { return seen_.size(); }
    std::size_t unseen_count() const { return counts_.size() - seen_.size(); }

  private:
    void check_letter(Letter a) const;
    double root_estimate(std::uint64_t nu) const;

    AdditiveEstimator estimator_;
    bool krichevsky_variant_;
    std::vector<std::uint64_t> counts_;
    std::vector<Letter> seen_;  // sorted by letter id
    std::uint64_t t_ = 0;

    // Walk cursor: 0 = root, 1 = escape vertex.
    int cursor_depth_ = 0;
};

// Monte-Carlo table of r^t for the escape predictor against a finite source,
// with the asymptotic min{s, |A|-1} target in the bound column (halved time
// scaling for the Krichevsky variant). s is the source's support size.
RedundancyReport theorem2_check(const Source& src, std::size_t alphabet_size,
                                const std::vector<std::uint64_t>& t_grid, const LabOptions& options,
                                bool krichevsky_variant = false);

} // namespace tpc
