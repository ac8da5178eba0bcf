#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"

namespace tpc {

// --- divergence ------------------------------------------------------------

// D(p||q) in bits over explicit finite pmfs. Zero-probability p terms
// contribute nothing; q must be positive wherever p is.
double kl_bits(const std::vector<double>& p, const std::vector<double>& q);

// log2(e) * (-1 + sum p(a)^2 / q(a)): an upper bound on D(p||q) valid for
// any pair of distributions; used as a sanity oracle for the KL routine.
double kl_quadratic_bound(const std::vector<double>& p, const std::vector<double>& q);

struct Divergence {
    double bits = 0.0;            // truncated KL sum
    double tail_mass = 0.0;       // source mass beyond the letters summed
    double remainder_bits = 0.0;  // analytic cap on the dropped terms (code trees)
};

// D(p || model prediction) against the model's current state. Countable
// sources are truncated at tail mass <= tail_eps; for code-tree models the
// dropped letters are covered by the log2(e) * sum p(a)*|c(a)| remainder.
Divergence model_divergence(const Source& src, const SequentialModel& model, double tail_eps);

// --- reports ----------------------------------------------------------------

struct RedundancyRow {
    std::uint64_t t = 0;
    double r_bits = 0.0;
    double stderr_bits = 0.0;               // 0 in exact mode
    std::optional<double> bound_bits;        // analytic bound when one applies
    double remainder_bits = 0.0;
    std::optional<double> cumulative_bits;   // R^t (cumulative mode only)
};

struct RedundancyReport {
    nlohmann::json predictor;
    nlohmann::json source;
    std::string rng = kRngName;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double tail_eps = 0.0;
    bool exact_mode = false;
    std::vector<RedundancyRow> rows;

    // Columns: t,r_t,stderr,bound,remainder,R_t (empty cells where a column
    // does not apply).
    std::string csv() const;
    std::string table() const;
};

struct LabOptions {
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    double tail_eps = 1e-9;
    // auto: exact enumeration when |A|^t <= kExactLimit, else Monte Carlo.
    enum class Exact { automatic, on, off } exact = Exact::automatic;
};

inline constexpr std::uint64_t kExactLimit = 4096;

// Whether exhaustive enumeration replaces sampling for this configuration.
bool exact_mode_applicable(const nlohmann::json& predictor_spec, const Source& src, std::uint64_t t);

// Average redundancy r^t at each horizon in t_grid. One trajectory per trial
// serves every grid point; exact mode enumerates all histories instead.
RedundancyReport average_redundancy(const nlohmann::json& predictor_spec, const Source& src,
                                    const std::vector<std::uint64_t>& t_grid, const LabOptions& options);

// Per-step divergences r^1..r^t_max plus their running average R^t.
RedundancyReport cumulative_redundancy(const nlohmann::json& predictor_spec, const Source& src,
                                       std::uint64_t t_max, const LabOptions& options);

// Running average helper: R^t = (1/t) * sum_{i<=t} r^i.
std::vector<double> running_average(const std::vector<double>& r);

struct SweepResult {
    std::vector<RedundancyReport> per_source;  // one single-row report each
    std::size_t argmax = 0;
    double max_r_bits = 0.0;

    std::string csv() const;  // pinned columns, one row per source
};

// Max of r^t over a finite source grid: a lower bound on the supremum over
// the source class.
SweepResult worst_case_sweep(const nlohmann::json& predictor_spec, const std::vector<Source>& sources,
                             std::uint64_t t, const LabOptions& options);

// Monte-Carlo check of the binomial inequality
//   p(A) * E[1/(count(A)+1)] <= min{p(A), 1/(t+1)}.
struct Lemma1Cell {
    double p = 0.0;
    std::uint64_t t = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    double bound = 0.0;
};

Lemma1Cell lemma1_mc(double p, std::uint64_t t, std::uint64_t trials, std::uint64_t seed);

// --- config-driven entry point (CLI / C API) --------------------------------

struct SimulateOutput {
    std::string csv;
    nlohmann::json resolved_config;  // defaults filled in; re-running it
                                     // reproduces the CSV byte for byte
};

SimulateOutput simulate(const nlohmann::json& config);

} // namespace tpc
