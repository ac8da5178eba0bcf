/* tpc — adaptive tree predictors and arithmetic coding, C API.
 *
 * All functions return a tpc_status; TPC_OK means success. On failure,
 * tpc_last_error() returns a thread-local message describing what went
 * wrong. Objects are opaque handles released with their _destroy function;
 * buffers and strings returned through out-parameters are released with the
 * matching tpc_free_* function.
 *
 * JSON formats:
 *   source     {"kind":"finite","probs":[...],"seed":0}
 *              {"kind":"geometric","ratio":0.5,"seed":0}
 *   predictor  {"predictor":"flat","alphabet_size":4,"estimator":"laplace"}
 *              {"predictor":"partition","groups":[[0,1],[2]]}
 *              {"predictor":"tree","tree":{"children":[{"letter":0},...]}}
 *              {"predictor":"escape","alphabet_size":100}
 *              {"predictor":"escape-kt","alphabet_size":100}
 *              {"predictor":"code-tree","code":{"rule":"unary"}}
 *   code       {"rule":"unary"|"elias-gamma"|"pow2"} or {"table":["0","10"]}
 *   estimator  "laplace" | "krichevsky" | "additive:<delta>"
 */
#ifndef TPC_H
#define TPC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpc_status {
    TPC_OK = 0,
    TPC_ERR_INVALID_ARGUMENT = 1,
    TPC_ERR_PARSE = 2,
    TPC_ERR_DOMAIN = 3,
    TPC_ERR_DECODE = 4,
    TPC_ERR_IO = 5,
    TPC_ERR_INTERNAL = 6
} tpc_status;

typedef struct tpc_source tpc_source;
typedef struct tpc_model tpc_model;

const char* tpc_version(void);
const char* tpc_status_name(tpc_status status);
/* Message for the most recent failure on this thread. */
const char* tpc_last_error(void);

void tpc_free_string(char* p);
void tpc_free_bytes(uint8_t* p);
void tpc_free_letters(uint32_t* p);

/* --- sources ------------------------------------------------------------ */

tpc_status tpc_source_create(const char* spec_json, tpc_source** out);
void tpc_source_destroy(tpc_source* src);
tpc_status tpc_source_pmf(const tpc_source* src, uint32_t letter, double* out);
/* i.i.d. draw of `length` letters; deterministic for a given seed. */
tpc_status tpc_source_sample(const tpc_source* src, uint64_t length, uint64_t seed,
                             uint32_t* out_letters);

/* --- predictors ----------------------------------------------------------- */

tpc_status tpc_model_create(const char* descriptor_json, tpc_model** out);
void tpc_model_destroy(tpc_model* model);
tpc_status tpc_model_predict(const tpc_model* model, uint32_t letter, double* out);
tpc_status tpc_model_update(tpc_model* model, uint32_t letter);
tpc_status tpc_model_descriptor(const tpc_model* model, char** json_out);

/* --- coding --------------------------------------------------------------- */

/* Encodes `count` letters under a fresh predictor built from the descriptor.
 * The stream is self-describing: magic "TPC1", version byte, length-prefixed
 * descriptor JSON, symbol count (u64 LE), then the arithmetic-coder payload
 * (bits MSB-first, zero-padded to a byte). payload_bits/ideal_bits may be
 * NULL when the caller does not need them. */
tpc_status tpc_encode(const char* descriptor_json, const uint32_t* letters, uint64_t count,
                      uint8_t** stream_out, size_t* stream_size, uint64_t* payload_bits,
                      double* ideal_bits);
tpc_status tpc_decode(const uint8_t* stream, size_t size, uint32_t** letters_out, uint64_t* count_out);
/* Header inspection without decoding the payload. */
tpc_status tpc_stream_info(const uint8_t* stream, size_t size, char** descriptor_json_out,
                           uint64_t* symbol_count_out);

/* --- redundancy lab --------------------------------------------------------
 *
 * config: {"mode":"average"|"cumulative"|"sweep",
 *          "predictor":{...},
 *          "source":{...} | "sources":[{...},...],
 *          "t":100 | "t_grid":[10,100] | "t_max":50,
 *          "trials":10000, "seed":1, "tail_eps":1e-9, "exact":"auto"}
 * csv_out columns: t,r_t,stderr,bound,remainder,R_t. resolved_config_out is
 * the config with every default filled in; re-running it reproduces the CSV
 * byte for byte. Either out-pointer may be NULL. */
tpc_status tpc_simulate(const char* config_json, char** csv_out, char** resolved_config_out);

/* Per-vertex redundancy bound for a tree predictor against a known source at
 * horizon t. Returns JSON: {"bits":..., "terms":[{"path":...,"sigma":...,
 * "subset_prob":...,"bits":...},...]}. */
tpc_status tpc_tree_bound(const char* tree_json, const char* source_json, uint64_t t,
                          char** report_json_out);

/* Kraft sum and prefix-freeness over the first max_letters codewords.
 * Returns JSON: {"sum":...,"prefix_free":...,"letters_checked":...,
 * "violation":[a,b] (present only on a violation)}. */
tpc_status tpc_kraft_check(const char* code_json, uint32_t max_letters, char** report_json_out);

/* Expected codeword length of a code under a source, truncated at tail_eps.
 * Returns JSON: {"bits":...,"tail_mass":...,"letters_used":...,
 * "divergent":...}. */
tpc_status tpc_expected_code_length(const char* code_json, const char* source_json, double tail_eps,
                                    char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* TPC_H */
