// tpc command-line tool: compress/decompress token streams with adaptive
// tree predictors, run redundancy simulations, and evaluate code/tree
// diagnostics. Talks to the library exclusively through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpc/tpc.h"

namespace {

using nlohmann::json;

[[noreturn]] void die(const std::string& message) {
    std::cerr << "tpc: " << message << "\n";
    std::exit(1);
}

void check(tpc_status status, const std::string& context) {
    if (status != TPC_OK)
        die(context + ": " + tpc_status_name(status) + " (" + tpc_last_error() + ")");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
    const std::string text = read_file(path);
    return std::vector<std::uint8_t>(text.begin(), text.end());
}

void write_file(const std::string& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary);
    if (!out) die("cannot write " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) die("short write to " + path);
}

// Spec arguments accept inline JSON ("{...}") or a path to a JSON file.
json load_spec(const std::string& arg, const std::string& what) {
    std::string text = arg;
    if (arg.empty() || arg[0] != '{') text = read_file(arg);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        die(what + ": invalid JSON: " + e.what());
    }
}

// Owned C string from the library.
struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { tpc_free_string(p); }
    std::string str() const { return p ? p : ""; }
};

struct PredictorFlags {
    std::string predictor = "flat";
    std::string estimator;
    std::uint64_t alphabet_size = 0;
    std::string tree;
    std::string code;
    std::string groups;

    void attach(CLI::App* cmd) {
        cmd->add_option("--predictor", predictor,
                        "flat | partition | tree | escape | escape-kt | code-tree")
            ->capture_default_str();
        cmd->add_option("--estimator", estimator, "laplace | krichevsky | additive:<delta>");
        cmd->add_option("--alphabet-size", alphabet_size, "alphabet size (flat/escape predictors)");
        cmd->add_option("--tree", tree, "tree topology JSON (inline or file)");
        cmd->add_option("--code", code, "prefix code JSON (inline or file)");
        cmd->add_option("--groups", groups, "partition groups JSON, e.g. [[0,1],[2]]");
    }

    json descriptor() const {
        json d{{"predictor", predictor}};
        if (!estimator.empty()) d["estimator"] = estimator;
        if (alphabet_size > 0) d["alphabet_size"] = alphabet_size;
        if (!tree.empty()) d["tree"] = load_spec(tree, "--tree");
        if (!code.empty()) d["code"] = load_spec(code, "--code");
        if (!groups.empty()) {
            try {
                d["groups"] = json::parse(groups);
            } catch (const json::exception& e) {
                die(std::string("--groups: invalid JSON: ") + e.what());
            }
        }
        return d;
    }
};

// Every run echoes its fully-resolved configuration on the diagnostic stream
// so reports can be reproduced from the log alone.
void echo_config(const json& config) { std::cerr << "config: " << config.dump() << "\n"; }

// --- compress / decompress ---------------------------------------------------

// Token inputs are newline-delimited; ids are assigned in first-occurrence
// order and the dictionary travels in the stream header.
std::vector<std::uint32_t> tokenize(const std::string& text, std::vector<std::string>& dictionary) {
    std::vector<std::uint32_t> ids;
    std::unordered_map<std::string, std::uint32_t> index;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto [it, fresh] = index.emplace(line, static_cast<std::uint32_t>(dictionary.size()));
        if (fresh) dictionary.push_back(line);
        ids.push_back(it->second);
    }
    return ids;
}

std::vector<std::uint32_t> parse_ids(const std::string& text) {
    std::vector<std::uint32_t> ids;
    std::istringstream in(text);
    long long v;
    while (in >> v) {
        if (v < 0) die("input: negative letter id");
        ids.push_back(static_cast<std::uint32_t>(v));
    }
    if (!in.eof()) die("input: expected whitespace-separated integer ids (or use --tokens)");
    return ids;
}

int cmd_compress(const std::string& in_path, const std::string& out_path, const PredictorFlags& flags,
                 bool tokens) {
    const std::string text = read_file(in_path);
    std::vector<std::string> dictionary;
    std::vector<std::uint32_t> ids = tokens ? tokenize(text, dictionary) : parse_ids(text);

    json descriptor = flags.descriptor();
    if (tokens) {
        descriptor["dictionary"] = dictionary;
        if (!descriptor.contains("alphabet_size") &&
            (flags.predictor == "flat" || flags.predictor == "escape" || flags.predictor == "escape-kt"))
            descriptor["alphabet_size"] = dictionary.size();
    }
    echo_config(json{{"command", "compress"},
                     {"input", in_path},
                     {"output", out_path},
                     {"tokens", tokens},
                     {"predictor", descriptor}});

    std::uint8_t* stream = nullptr;
    std::size_t stream_size = 0;
    std::uint64_t payload_bits = 0;
    double ideal_bits = 0.0;
    check(tpc_encode(descriptor.dump().c_str(), ids.data(), ids.size(), &stream, &stream_size,
                     &payload_bits, &ideal_bits),
          "encode");
    write_file(out_path, stream, stream_size);
    tpc_free_bytes(stream);

    std::printf("symbols:      %zu\n", ids.size());
    std::printf("payload bits: %llu\n", static_cast<unsigned long long>(payload_bits));
    std::printf("ideal bits:   %.6f\n", ideal_bits);
    std::printf("bits/symbol:  %.6f\n",
                ids.empty() ? 0.0 : static_cast<double>(payload_bits) / static_cast<double>(ids.size()));
    std::printf("stream bytes: %zu\n", stream_size);
    return 0;
}

int cmd_decompress(const std::string& in_path, const std::string& out_path) {
    const auto stream = read_binary(in_path);
    echo_config(json{{"command", "decompress"}, {"input", in_path}, {"output", out_path}});

    OwnedString descriptor_text;
    std::uint64_t declared = 0;
    check(tpc_stream_info(stream.data(), stream.size(), &descriptor_text.p, &declared), "stream header");
    json descriptor;
    try {
        descriptor = json::parse(descriptor_text.str());
    } catch (const json::exception& e) {
        die(std::string("stream descriptor: ") + e.what());
    }

    std::uint32_t* letters = nullptr;
    std::uint64_t count = 0;
    check(tpc_decode(stream.data(), stream.size(), &letters, &count), "decode");

    std::ostringstream out;
    if (descriptor.contains("dictionary")) {
        const auto dictionary = descriptor["dictionary"].get<std::vector<std::string>>();
        for (std::uint64_t i = 0; i < count; ++i) {
            if (letters[i] >= dictionary.size()) {
                tpc_free_letters(letters);
                die("decode: letter id outside the embedded dictionary");
            }
            out << dictionary[letters[i]] << '\n';
        }
    } else {
        for (std::uint64_t i = 0; i < count; ++i) out << letters[i] << '\n';
    }
    tpc_free_letters(letters);
    const std::string text = out.str();
    write_file(out_path, text.data(), text.size());
    std::printf("symbols: %llu\n", static_cast<unsigned long long>(count));
    return 0;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const std::string& config_arg, const PredictorFlags& flags, const std::string& source,
                 const std::string& t_list, std::uint64_t t_max, std::uint64_t trials, std::uint64_t seed,
                 double tail_eps, const std::string& mode, const std::string& out_path) {
    json config;
    if (!config_arg.empty()) {
        config = load_spec(config_arg, "--config");
    } else {
        config["mode"] = mode;
        config["predictor"] = flags.descriptor();
        if (!source.empty()) {
            if (mode == "sweep") {
                json parsed = load_spec(source, "--source");
                config["sources"] = parsed.is_array() ? parsed : json::array({parsed});
            } else {
                config["source"] = load_spec(source, "--source");
            }
        }
        if (!t_list.empty()) {
            std::vector<std::uint64_t> grid;
            std::istringstream in(t_list);
            std::string item;
            while (std::getline(in, item, ',')) grid.push_back(std::stoull(item));
            if (grid.size() == 1)
                config["t"] = grid[0];
            else
                config["t_grid"] = grid;
        }
        if (t_max > 0) config["t_max"] = t_max;
        config["trials"] = trials;
        config["seed"] = seed;
        config["tail_eps"] = tail_eps;
    }

    OwnedString csv, resolved;
    check(tpc_simulate(config.dump().c_str(), &csv.p, &resolved.p), "simulate");
    std::cerr << "config: " << resolved.str() << "\n";
    if (out_path.empty() || out_path == "-") {
        std::fputs(csv.str().c_str(), stdout);
    } else {
        const std::string text = csv.str();
        write_file(out_path, text.data(), text.size());
    }
    return 0;
}

// --- bound / kraft -------------------------------------------------------------

int cmd_bound(const std::string& tree, const std::string& source, std::uint64_t t) {
    const json tree_spec = load_spec(tree, "--tree");
    const json source_spec = load_spec(source, "--source");
    echo_config(json{{"command", "bound"}, {"tree", tree_spec}, {"source", source_spec}, {"t", t}});

    OwnedString report_text;
    check(tpc_tree_bound(tree_spec.dump().c_str(), source_spec.dump().c_str(), t, &report_text.p),
          "bound");
    const json report = json::parse(report_text.str());
    std::printf("bound: %.6f bits (t = %llu)\n", report["bits"].get<double>(),
                static_cast<unsigned long long>(t));
    std::printf("%-12s %8s %14s %14s\n", "vertex", "sons", "subset_prob", "term_bits");
    for (const auto& term : report["terms"]) {
        std::printf("%-12s %8llu %14.6g %14.6g\n", term["path"].get<std::string>().c_str(),
                    term["sigma"].get<unsigned long long>(), term["subset_prob"].get<double>(),
                    term["bits"].get<double>());
    }
    return 0;
}

int cmd_kraft(const std::string& code, const std::string& source, std::uint32_t max_letters,
              double tail_eps) {
    const json code_spec = load_spec(code, "--code");
    echo_config(json{{"command", "kraft"},
                     {"code", code_spec},
                     {"max_letters", max_letters},
                     {"tail_eps", tail_eps}});

    OwnedString kraft_text;
    check(tpc_kraft_check(code_spec.dump().c_str(), max_letters, &kraft_text.p), "kraft");
    const json kraft = json::parse(kraft_text.str());
    std::printf("kraft sum:   %.12g over %llu codewords\n", kraft["sum"].get<double>(),
                kraft["letters_checked"].get<unsigned long long>());
    std::printf("prefix-free: %s\n", kraft["prefix_free"].get<bool>() ? "yes" : "NO");
    if (kraft.contains("violation")) {
        std::printf("violation:   codeword of letter %u is a prefix of letter %u\n",
                    kraft["violation"][0].get<unsigned>(), kraft["violation"][1].get<unsigned>());
    }

    if (!source.empty()) {
        const json source_spec = load_spec(source, "--source");
        OwnedString length_text;
        check(tpc_expected_code_length(code_spec.dump().c_str(), source_spec.dump().c_str(), tail_eps,
                                       &length_text.p),
              "expected length");
        const json length = json::parse(length_text.str());
        if (length["divergent"].get<bool>()) {
            std::printf("expected length: DIVERGENT (partial sum %.6g bits over %llu letters)\n",
                        length["bits"].get<double>(), length["letters_used"].get<unsigned long long>());
        } else {
            std::printf("expected length: %.9f bits (tail mass %.3g)\n", length["bits"].get<double>(),
                        length["tail_mass"].get<double>());
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive tree-predictor coding toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tpc_version()));

    // compress
    auto* compress = app.add_subcommand("compress", "encode a token file into a TPC1 stream");
    std::string c_in, c_out;
    bool c_tokens = false;
    PredictorFlags c_flags;
    compress->add_option("--in", c_in, "input file")->required();
    compress->add_option("--out", c_out, "output stream file")->required();
    compress->add_flag("--tokens", c_tokens, "treat input as newline-delimited tokens");
    c_flags.attach(compress);

    // decompress
    auto* decompress = app.add_subcommand("decompress", "decode a TPC1 stream");
    std::string d_in, d_out;
    decompress->add_option("--in", d_in, "input stream file")->required();
    decompress->add_option("--out", d_out, "output file")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "redundancy experiments, CSV output");
    std::string s_config, s_source, s_t, s_mode = "average", s_out;
    std::uint64_t s_tmax = 0, s_trials = 10000, s_seed = 1;
    double s_tail = 1e-9;
    PredictorFlags s_flags;
    simulate->add_option("--config", s_config, "full config JSON (inline or file); overrides other flags");
    s_flags.attach(simulate);
    simulate->add_option("--source", s_source, "source JSON (inline or file); array for sweep mode");
    simulate->add_option("--t", s_t, "horizon, or comma-separated grid, e.g. 10,100,1000");
    simulate->add_option("--t-max", s_tmax, "horizon for cumulative mode");
    simulate->add_option("--mode", s_mode, "average | cumulative | sweep")->capture_default_str();
    simulate->add_option("--trials", s_trials, "Monte-Carlo trials")->capture_default_str();
    simulate->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    simulate->add_option("--tail-eps", s_tail, "tail mass cutoff for countable sums")
        ->capture_default_str();
    simulate->add_option("--out", s_out, "CSV output file (default: stdout)");

    // bound
    auto* bound = app.add_subcommand("bound", "tree redundancy bound with per-vertex terms");
    std::string b_tree, b_source;
    std::uint64_t b_t = 0;
    bound->add_option("--tree", b_tree, "tree topology JSON (inline or file)")->required();
    bound->add_option("--source", b_source, "source JSON (inline or file)")->required();
    bound->add_option("--t", b_t, "history length")->required();

    // kraft
    auto* kraft = app.add_subcommand("kraft", "Kraft sum, prefix check, expected codeword length");
    std::string k_code, k_source;
    std::uint32_t k_max = 64;
    double k_tail = 1e-9;
    kraft->add_option("--code", k_code, "code JSON (inline or file)")->required();
    kraft->add_option("--source", k_source, "source JSON for expected codeword length");
    kraft->add_option("--max-letters", k_max, "codewords to enumerate")->capture_default_str();
    kraft->add_option("--tail-eps", k_tail, "tail mass cutoff")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (compress->parsed()) return cmd_compress(c_in, c_out, c_flags, c_tokens);
    if (decompress->parsed()) return cmd_decompress(d_in, d_out);
    if (simulate->parsed())
        return cmd_simulate(s_config, s_flags, s_source, s_t, s_tmax, s_trials, s_seed, s_tail, s_mode,
                            s_out);
    if (bound->parsed()) return cmd_bound(b_tree, b_source, b_t);
    if (kraft->parsed()) return cmd_kraft(k_code, k_source, k_max, k_tail);
    return 1;
}
