#include "tpc/tpc.h"

#include <cstring>
#include <new>
#include <string>

#include "coder.hpp"
#include "prefix_code.hpp"
#include "redundancy_lab.hpp"
#include "tree_predictor.hpp"

using namespace tpc;

struct tpc_source {
    Source src;
};

struct tpc_model {
    std::unique_ptr<SequentialModel> model;
};

namespace {

thread_local std::string g_last_error;

tpc_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return TPC_ERR_INVALID_ARGUMENT;
        case ErrorCode::parse: return TPC_ERR_PARSE;
        case ErrorCode::domain: return TPC_ERR_DOMAIN;
        case ErrorCode::decode: return TPC_ERR_DECODE;
        case ErrorCode::io: return TPC_ERR_IO;
    }
    return TPC_ERR_INTERNAL;
}

// Runs the body and maps C++ failures onto status codes + last-error text.
template <typename Fn>
tpc_status guarded(Fn&& fn) {
    try {
        fn();
        return TPC_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return TPC_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TPC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TPC_ERR_INTERNAL;
    }
}

nlohmann::json parse_json_arg(const char* text, const char* what) {
    require(text != nullptr, ErrorCode::invalid_argument, std::string(what) + ": null pointer");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string(what) + ": " + e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* tpc_version(void) { return "1.0.0"; }

const char* tpc_status_name(tpc_status status) {
    switch (status) {
        case TPC_OK: return "ok";
        case TPC_ERR_INVALID_ARGUMENT: return "invalid argument";
        case TPC_ERR_PARSE: return "parse error";
        case TPC_ERR_DOMAIN: return "domain error";
        case TPC_ERR_DECODE: return "decode error";
        case TPC_ERR_IO: return "io error";
        case TPC_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* tpc_last_error(void) { return g_last_error.c_str(); }

void tpc_free_string(char* p) { delete[] p; }
void tpc_free_bytes(uint8_t* p) { delete[] p; }
void tpc_free_letters(uint32_t* p) { delete[] p; }

tpc_status tpc_source_create(const char* spec_json, tpc_source** out) {
    return guarded([&] {
        require(out != nullptr, ErrorCode::invalid_argument, "source_create: null out pointer");
        auto spec = parse_json_arg(spec_json, "source spec");
        *out = new tpc_source{Source::from_json(spec)};
    });
}

void tpc_source_destroy(tpc_source* src) { delete src; }

tpc_status tpc_source_pmf(const tpc_source* src, uint32_t letter, double* out) {
    return guarded([&] {
        require(src != nullptr && out != nullptr, ErrorCode::invalid_argument, "source_pmf: null pointer");
        *out = src->src.pmf(letter);
    });
}

tpc_status tpc_source_sample(const tpc_source* src, uint64_t length, uint64_t seed,
                             uint32_t* out_letters) {
    return guarded([&] {
        require(src != nullptr && (out_letters != nullptr || length == 0), ErrorCode::invalid_argument,
                "source_sample: null pointer");
        Sampler sampler(src->src, seed);
        for (uint64_t i = 0; i < length; ++i) out_letters[i] = sampler.next();
    });
}

tpc_status tpc_model_create(const char* descriptor_json, tpc_model** out) {
    return guarded([&] {
        require(out != nullptr, ErrorCode::invalid_argument, "model_create: null out pointer");
        auto spec = parse_json_arg(descriptor_json, "predictor spec");
        *out = new tpc_model{model_from_json(spec)};
    });
}

void tpc_model_destroy(tpc_model* model) { delete model; }

tpc_status tpc_model_predict(const tpc_model* model, uint32_t letter, double* out) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, ErrorCode::invalid_argument, "model_predict: null pointer");
        *out = model->model->predict(letter);
    });
}

tpc_status tpc_model_update(tpc_model* model, uint32_t letter) {
    return guarded([&] {
        require(model != nullptr, ErrorCode::invalid_argument, "model_update: null pointer");
        model->model->update(letter);
    });
}

tpc_status tpc_model_descriptor(const tpc_model* model, char** json_out) {
    return guarded([&] {
        require(model != nullptr && json_out != nullptr, ErrorCode::invalid_argument,
                "model_descriptor: null pointer");
        *json_out = dup_string(model->model->descriptor().dump());
    });
}

tpc_status tpc_encode(const char* descriptor_json, const uint32_t* letters, uint64_t count,
                      uint8_t** stream_out, size_t* stream_size, uint64_t* payload_bits,
                      double* ideal_bits) {
    return guarded([&] {
        require(stream_out != nullptr && stream_size != nullptr, ErrorCode::invalid_argument,
                "encode: null out pointer");
        require(letters != nullptr || count == 0, ErrorCode::invalid_argument, "encode: null letters");
        auto spec = parse_json_arg(descriptor_json, "predictor spec");
        auto model = model_from_json(spec);
        std::vector<Letter> seq(letters, letters + count);

        // A caller-supplied dictionary rides along in the stream header.
        EncodeResult result;
        if (spec.contains("dictionary")) {
            nlohmann::json merged = model->descriptor();
            merged["dictionary"] = spec["dictionary"];
            result = encode(*model, seq, &merged);
        } else {
            result = encode(*model, seq);
        }
        auto* bytes = new uint8_t[result.stream.size()];
        std::memcpy(bytes, result.stream.data(), result.stream.size());
        *stream_out = bytes;
        *stream_size = result.stream.size();
        if (payload_bits) *payload_bits = result.payload_bits;
        if (ideal_bits) *ideal_bits = result.ideal_bits;
    });
}

tpc_status tpc_decode(const uint8_t* stream, size_t size, uint32_t** letters_out, uint64_t* count_out) {
    return guarded([&] {
        require(stream != nullptr && letters_out != nullptr && count_out != nullptr,
                ErrorCode::invalid_argument, "decode: null pointer");
        auto result = decode(stream, size);
        auto* letters = new uint32_t[result.letters.size()];
        std::memcpy(letters, result.letters.data(), result.letters.size() * sizeof(uint32_t));
        *letters_out = letters;
        *count_out = result.letters.size();
    });
}

tpc_status tpc_stream_info(const uint8_t* stream, size_t size, char** descriptor_json_out,
                           uint64_t* symbol_count_out) {
    return guarded([&] {
        require(stream != nullptr, ErrorCode::invalid_argument, "stream_info: null pointer");
        auto info = stream_info(stream, size);
        if (descriptor_json_out) *descriptor_json_out = dup_string(info.descriptor.dump());
        if (symbol_count_out) *symbol_count_out = info.symbol_count;
    });
}

tpc_status tpc_simulate(const char* config_json, char** csv_out, char** resolved_config_out) {
    return guarded([&] {
        auto config = parse_json_arg(config_json, "simulate config");
        auto result = simulate(config);
        if (csv_out) *csv_out = dup_string(result.csv);
        if (resolved_config_out) *resolved_config_out = dup_string(result.resolved_config.dump());
    });
}

tpc_status tpc_tree_bound(const char* tree_json, const char* source_json, uint64_t t,
                          char** report_json_out) {
    return guarded([&] {
        require(report_json_out != nullptr, ErrorCode::invalid_argument, "tree_bound: null out pointer");
        auto topology = parse_json_arg(tree_json, "tree spec");
        auto src = Source::from_json(parse_json_arg(source_json, "source spec"));
        auto tree = PredictorTree::from_json(topology, AdditiveEstimator::laplace());
        auto bound = theorem1_bound(tree, src, t);
        nlohmann::json report{{"bits", bound.bits}, {"t", t}};
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& term : bound.terms) {
            terms.push_back(nlohmann::json{{"path", term.path},
                                           {"sigma", term.sigma},
                                           {"subset_prob", term.subset_prob},
                                           {"bits", term.term_bits}});
        }
        report["terms"] = terms;
        *report_json_out = dup_string(report.dump());
    });
}

tpc_status tpc_kraft_check(const char* code_json, uint32_t max_letters, char** report_json_out) {
    return guarded([&] {
        require(report_json_out != nullptr, ErrorCode::invalid_argument, "kraft_check: null out pointer");
        auto code = PrefixCode::from_json(parse_json_arg(code_json, "code spec"));
        auto report = kraft_check(code, max_letters);
        nlohmann::json j{{"sum", report.sum},
                         {"prefix_free", report.prefix_free},
                         {"letters_checked", report.letters_checked}};
        if (report.violation) j["violation"] = {report.violation->first, report.violation->second};
        *report_json_out = dup_string(j.dump());
    });
}

tpc_status tpc_expected_code_length(const char* code_json, const char* source_json, double tail_eps,
                                    char** report_json_out) {
    return guarded([&] {
        require(report_json_out != nullptr, ErrorCode::invalid_argument,
                "expected_code_length: null out pointer");
        auto code = PrefixCode::from_json(parse_json_arg(code_json, "code spec"));
        auto src = Source::from_json(parse_json_arg(source_json, "source spec"));
        auto report = expected_codeword_length(code, src, tail_eps);
        nlohmann::json j{{"bits", report.bits},
                         {"tail_mass", report.tail_mass},
                         {"letters_used", report.letters_used},
                         {"divergent", report.divergent}};
        *report_json_out = dup_string(j.dump());
    });
}

} // extern "C"
