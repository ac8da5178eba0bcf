#include "redundancy_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "escape_predictor.hpp"
#include "estimators.hpp"
#include "prefix_code.hpp"
#include "tree_predictor.hpp"

namespace tpc {

double kl_bits(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), ErrorCode::invalid_argument, "kl: dimension mismatch");
    double bits = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        require(q[i] > 0.0, ErrorCode::domain, "kl: q vanishes on the support of p (infinite divergence)");
        bits += p[i] * (std::log2(p[i]) - std::log2(q[i]));
    }
    return bits;
}

double kl_quadratic_bound(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), ErrorCode::invalid_argument, "kl bound: dimension mismatch");
    double sum = -1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        require(q[i] > 0.0, ErrorCode::domain, "kl bound: q vanishes on the support of p");
        sum += p[i] * p[i] / q[i];
    }
    return kLog2E * sum;
}

Divergence model_divergence(const Source& src, const SequentialModel& model, double tail_eps) {
    Divergence d;
    if (src.is_finite()) {
        const std::size_t n = src.alphabet_size();
        for (Letter a = 0; a < n; ++a) {
            const double p = src.pmf(a);
            if (p <= 0.0) continue;
            const double log2_q = model.predict_log2(a);
            require(std::isfinite(log2_q), ErrorCode::domain,
                    "divergence: model assigns zero probability");
            d.bits += p * (std::log2(p) - log2_q);
        }
        return d;
    }

    constexpr Letter kLetterCap = 1 << 20;
    double mass = 0.0;
    Letter a = 0;
    for (; a < kLetterCap && 1.0 - mass > tail_eps; ++a) {
        const double p = src.pmf(a);
        mass += p;
        if (p <= 0.0) continue;
        const double log2_q = model.predict_log2(a);
        require(std::isfinite(log2_q), ErrorCode::domain, "divergence: model assigns zero probability");
        d.bits += p * (std::log2(p) - log2_q);
    }
    d.tail_mass = std::max(0.0, 1.0 - mass);

    // Dropped letters contribute at most log2(e) * p(a) * chi(a) each; only
    // code-tree models reach this countable path.
    if (const auto* lazy = dynamic_cast<const LazyCodeTree*>(&model)) {
        double remainder = 0.0;
        for (Letter b = a; b < kLetterCap; ++b) {
            const double p = src.pmf(b);
            const double term = p > 0.0 ? p * lazy->code().codeword_length_bits(b) : 0.0;
            remainder += term;
            if (term < 1e-18) break;
        }
        d.remainder_bits = kLog2E * remainder;
    }
    return d;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Analytic bound for the r^t column, when theory provides one for this
// predictor/source pair. Tree predictors get the per-vertex min bound;
// escape predictors get the asymptotic min{s,|A|-1} target (in bits, i.e.
// scaled by log2 e); Krichevsky variants carry the 1/(2t) asymptote.
std::optional<double> analytic_bound(const nlohmann::json& predictor_spec, const Source& src,
                                     std::uint64_t t, double tail_eps) {
    const std::string name = predictor_spec.value("predictor", "");
    const std::string estimator = predictor_spec.value(
        "estimator", name == "escape-kt" ? "krichevsky" : "laplace");
    const bool laplace = estimator == "laplace";
    const bool krichevsky = estimator == "krichevsky";

    if (name == "flat" || name == "partition" || name == "tree") {
        if (!src.is_finite()) return std::nullopt;
        if (laplace) {
            auto model = model_from_json(predictor_spec);
            const auto* tree = dynamic_cast<const PredictorTree*>(model.get());
            if (!tree) return std::nullopt;
            return theorem1_bound(*tree, src, t).bits;
        }
        if (krichevsky && name == "flat") {
            const auto n = predictor_spec["alphabet_size"].get<std::uint64_t>();
            return krichevsky_asymptote(n) / (2.0 * static_cast<double>(t));
        }
        return std::nullopt;
    }
    if (name == "escape" || name == "escape-kt") {
        if (!src.is_finite() || !(laplace || krichevsky)) return std::nullopt;
        const auto n = predictor_spec["alphabet_size"].get<double>();
        const double s = static_cast<double>(src.support_size());
        const double limit = std::min(s, n - 1.0) * kLog2E;
        return limit / ((krichevsky ? 2.0 : 1.0) * static_cast<double>(t));
    }
    if (name == "code-tree" && laplace) {
        const auto code = PrefixCode::from_json(predictor_spec.at("code"));
        const auto bound = theorem1_code_bound(code, src, t, tail_eps);
        return bound.bits + bound.remainder_bits;
    }
    return std::nullopt;
}

struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double stderr_mean() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

} // namespace

bool exact_mode_applicable(const nlohmann::json& predictor_spec, const Source& src, std::uint64_t t) {
    if (!src.is_finite()) return false;
    auto model = model_from_json(predictor_spec);
    if (!model->finite()) return false;
    const std::uint64_t n = src.alphabet_size();
    std::uint64_t histories = 1;
    for (std::uint64_t i = 0; i < t; ++i) {
        histories *= n;
        if (histories > kExactLimit) return false;
    }
    return true;
}

namespace {

// Exhaustive E[D] over all histories in A^t, each weighted by its source
// probability. Zero-probability letters are skipped outright. Depth-first
// with one model clone per branch; at <= 4096 histories this stays trivial.
void exact_walk(const SequentialModel& model, const Source& src, std::uint64_t remaining,
                double prob, double tail_eps, double& total) {
    if (remaining == 0) {
        total += prob * model_divergence(src, model, tail_eps).bits;
        return;
    }
    const std::size_t n = src.alphabet_size();
    for (Letter a = 0; a < n; ++a) {
        const double p = src.pmf(a);
        if (p <= 0.0) continue;
        auto next = model.clone();
        next->update(a);
        exact_walk(*next, src, remaining - 1, prob * p, tail_eps, total);
    }
}

double exact_average(const SequentialModel& prototype, const Source& src, std::uint64_t t,
                     double tail_eps) {
    double total = 0.0;
    exact_walk(prototype, src, t, 1.0, tail_eps, total);
    return total;
}

} // namespace

RedundancyReport average_redundancy(const nlohmann::json& predictor_spec, const Source& src,
                                    const std::vector<std::uint64_t>& t_grid, const LabOptions& options) {
    require(!t_grid.empty(), ErrorCode::invalid_argument, "average_redundancy: empty t grid");
    require(options.trials >= 1, ErrorCode::invalid_argument, "average_redundancy: trials must be >= 1");
    auto grid = t_grid;
    std::sort(grid.begin(), grid.end());

    RedundancyReport report;
    report.predictor = predictor_spec;
    report.source = src.to_json();
    report.trials = options.trials;
    report.seed = options.seed;
    report.tail_eps = options.tail_eps;

    const auto prototype = model_from_json(predictor_spec);

    const bool want_exact = options.exact != LabOptions::Exact::off;
    const bool all_exact =
        want_exact && std::all_of(grid.begin(), grid.end(), [&](std::uint64_t t) {
            return exact_mode_applicable(predictor_spec, src, t);
        });
    if (options.exact == LabOptions::Exact::on)
        require(all_exact, ErrorCode::domain, "average_redundancy: exact mode requested but not applicable");

    if (all_exact) {
        report.exact_mode = true;
        for (std::uint64_t t : grid) {
            RedundancyRow row;
            row.t = t;
            row.r_bits = exact_average(*prototype, src, t, options.tail_eps);
            row.bound_bits = analytic_bound(predictor_spec, src, t, options.tail_eps);
            report.rows.push_back(row);
        }
        return report;
    }

    // One trajectory per trial; every grid horizon reads the same walk.
    std::vector<Welford> stats(grid.size());
    for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
        Sampler sampler(src, mix_seed(options.seed, trial));
        auto model = prototype->clone();
        std::uint64_t step = 0;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            for (; step < grid[gi]; ++step) model->update(sampler.next());
            stats[gi].add(model_divergence(src, *model, options.tail_eps).bits);
        }
    }
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        RedundancyRow row;
        row.t = grid[gi];
        row.r_bits = stats[gi].mean;
        row.stderr_bits = stats[gi].stderr_mean();
        row.bound_bits = analytic_bound(predictor_spec, src, grid[gi], options.tail_eps);
        // The truncation remainder depends only on the source tail and the
        // code lengths, not on model state; one fresh evaluation covers it.
        if (!src.is_finite())
            row.remainder_bits = model_divergence(src, *prototype, options.tail_eps).remainder_bits;
        report.rows.push_back(row);
    }
    return report;
}

RedundancyReport cumulative_redundancy(const nlohmann::json& predictor_spec, const Source& src,
                                       std::uint64_t t_max, const LabOptions& options) {
    require(t_max >= 1, ErrorCode::invalid_argument, "cumulative_redundancy: t_max must be >= 1");
    require(options.trials >= 1, ErrorCode::invalid_argument, "cumulative_redundancy: trials must be >= 1");

    RedundancyReport report;
    report.predictor = predictor_spec;
    report.source = src.to_json();
    report.trials = options.trials;
    report.seed = options.seed;
    report.tail_eps = options.tail_eps;

    const auto prototype = model_from_json(predictor_spec);
    std::vector<Welford> stats(t_max);
    for (std::uint64_t trial = 0; trial < options.trials; ++trial) {
        Sampler sampler(src, mix_seed(options.seed, trial));
        auto model = prototype->clone();
        for (std::uint64_t i = 1; i <= t_max; ++i) {
            model->update(sampler.next());
            stats[i - 1].add(model_divergence(src, *model, options.tail_eps).bits);
        }
    }
    std::vector<double> r(t_max);
    for (std::uint64_t i = 0; i < t_max; ++i) r[i] = stats[i].mean;
    const auto cumulative = running_average(r);
    for (std::uint64_t i = 0; i < t_max; ++i) {
        RedundancyRow row;
        row.t = i + 1;
        row.r_bits = r[i];
        row.stderr_bits = stats[i].stderr_mean();
        row.bound_bits = analytic_bound(predictor_spec, src, i + 1, options.tail_eps);
        row.cumulative_bits = cumulative[i];
        report.rows.push_back(row);
    }
    return report;
}

std::vector<double> running_average(const std::vector<double>& r) {
    std::vector<double> out(r.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        acc += r[i];
        out[i] = acc / static_cast<double>(i + 1);
    }
    return out;
}

SweepResult worst_case_sweep(const nlohmann::json& predictor_spec, const std::vector<Source>& sources,
                             std::uint64_t t, const LabOptions& options) {
    require(!sources.empty(), ErrorCode::invalid_argument, "worst_case_sweep: empty source grid");
    SweepResult result;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        auto report = average_redundancy(predictor_spec, sources[i], {t}, options);
        const double r = report.rows[0].r_bits;
        if (i == 0 || r > result.max_r_bits) {
            result.max_r_bits = r;
            result.argmax = i;
        }
        result.per_source.push_back(std::move(report));
    }
    return result;
}

Lemma1Cell lemma1_mc(double p, std::uint64_t t, std::uint64_t trials, std::uint64_t seed) {
    require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "lemma1: p must lie in (0,1)");
    Lemma1Cell cell;
    cell.p = p;
    cell.t = t;
    cell.bound = std::min(p, 1.0 / (static_cast<double>(t) + 1.0));
    Welford stats;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(mix_seed(seed, trial));
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < t; ++i) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (u < p) ++hits;
        }
        stats.add(p / static_cast<double>(hits + 1));
    }
    cell.mean = stats.mean;
    cell.stderr_mean = stats.stderr_mean();
    return cell;
}

// --- report formatting -------------------------------------------------------

std::string RedundancyReport::csv() const {
    std::string out = "t,r_t,stderr,bound,remainder,R_t\n";
    for (const auto& row : rows) {
        out += std::to_string(row.t);
        out += ',';
        out += format_double(row.r_bits);
        out += ',';
        out += format_double(row.stderr_bits);
        out += ',';
        if (row.bound_bits) out += format_double(*row.bound_bits);
        out += ',';
        out += format_double(row.remainder_bits);
        out += ',';
        if (row.cumulative_bits) out += format_double(*row.cumulative_bits);
        out += '\n';
    }
    return out;
}

std::string RedundancyReport::table() const {
    std::ostringstream out;
    out << "predictor: " << predictor.dump() << "\n";
    out << "source:    " << source.dump() << "\n";
    out << "rng: " << rng << "  seed: " << seed << "  trials: " << trials
        << (exact_mode ? "  (exact enumeration)" : "") << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%10s %14s %12s %14s %12s %14s\n", "t", "r_t", "stderr", "bound",
                  "remainder", "R_t");
    out << line;
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%10llu %14.6g %12.3g %14s %12.3g %14s\n",
                      static_cast<unsigned long long>(row.t), row.r_bits, row.stderr_bits,
                      row.bound_bits ? format_double(*row.bound_bits).c_str() : "-", row.remainder_bits,
                      row.cumulative_bits ? format_double(*row.cumulative_bits).c_str() : "-");
        out << line;
    }
    return out.str();
}

std::string SweepResult::csv() const {
    std::string out = "t,r_t,stderr,bound,remainder,R_t\n";
    for (const auto& report : per_source) {
        for (const auto& row : report.rows) {
            out += std::to_string(row.t);
            out += ',';
            out += format_double(row.r_bits);
            out += ',';
            out += format_double(row.stderr_bits);
            out += ',';
            if (row.bound_bits) out += format_double(*row.bound_bits);
            out += ',';
            out += format_double(row.remainder_bits);
            out += ",\n";
        }
    }
    return out;
}

// --- config-driven entry point -----------------------------------------------

SimulateOutput simulate(const nlohmann::json& config) {
    require(config.is_object(), ErrorCode::parse, "simulate config: expected a JSON object");
    const std::string mode = config.value("mode", "average");
    require(config.contains("predictor"), ErrorCode::parse, "simulate config: missing \"predictor\"");

    LabOptions options;
    options.trials = config.value("trials", std::uint64_t{10000});
    options.seed = config.value("seed", std::uint64_t{1});
    options.tail_eps = config.value("tail_eps", 1e-9);
    const std::string exact = config.value("exact", "auto");
    if (exact == "on")
        options.exact = LabOptions::Exact::on;
    else if (exact == "off")
        options.exact = LabOptions::Exact::off;
    else
        require(exact == "auto", ErrorCode::parse, "simulate config: \"exact\" must be auto|on|off");

    nlohmann::json resolved{{"mode", mode},
                            {"predictor", config["predictor"]},
                            {"trials", options.trials},
                            {"seed", options.seed},
                            {"tail_eps", options.tail_eps},
                            {"exact", exact},
                            {"rng", kRngName}};

    SimulateOutput out;
    if (mode == "average") {
        require(config.contains("source"), ErrorCode::parse, "simulate config: missing \"source\"");
        const Source src = Source::from_json(config["source"]);
        std::vector<std::uint64_t> grid;
        if (config.contains("t_grid"))
            grid = config["t_grid"].get<std::vector<std::uint64_t>>();
        else if (config.contains("t"))
            grid = {config["t"].get<std::uint64_t>()};
        require(!grid.empty(), ErrorCode::parse, "simulate config: average mode needs \"t\" or \"t_grid\"");
        std::sort(grid.begin(), grid.end());  // echoed grid matches row order
        auto report = average_redundancy(config["predictor"], src, grid, options);
        resolved["source"] = src.to_json();
        resolved["t_grid"] = grid;
        resolved["exact_mode_used"] = report.exact_mode;
        out.csv = report.csv();
    } else if (mode == "cumulative") {
        require(config.contains("source"), ErrorCode::parse, "simulate config: missing \"source\"");
        require(config.contains("t_max"), ErrorCode::parse, "simulate config: cumulative mode needs \"t_max\"");
        const Source src = Source::from_json(config["source"]);
        const auto t_max = config["t_max"].get<std::uint64_t>();
        auto report = cumulative_redundancy(config["predictor"], src, t_max, options);
        resolved["source"] = src.to_json();
        resolved["t_max"] = t_max;
        out.csv = report.csv();
    } else if (mode == "sweep") {
        require(config.contains("sources") && config["sources"].is_array(), ErrorCode::parse,
                "simulate config: sweep mode needs a \"sources\" array");
        require(config.contains("t"), ErrorCode::parse, "simulate config: sweep mode needs \"t\"");
        std::vector<Source> sources;
        for (const auto& sj : config["sources"]) sources.push_back(Source::from_json(sj));
        const auto t = config["t"].get<std::uint64_t>();
        auto sweep = worst_case_sweep(config["predictor"], sources, t, options);
        nlohmann::json sources_json = nlohmann::json::array();
        for (const auto& s : sources) sources_json.push_back(s.to_json());
        resolved["sources"] = sources_json;
        resolved["t"] = t;
        resolved["max_r_t"] = sweep.max_r_bits;
        resolved["argmax_source"] = sweep.argmax;
        // A grid maximum can only under-shoot the true supremum over sources.
        resolved["max_note"] = "grid maximum: lower bound on sup over the source class";
        out.csv = sweep.csv();
    } else {
        fail(ErrorCode::parse, "simulate config: unknown mode \"" + mode + "\"");
    }
    out.resolved_config = resolved;
    return out;
}

} // namespace tpc
