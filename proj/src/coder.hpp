#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace tpc {

// MSB-first bit sink, zero-padded to a byte boundary on demand.
class BitWriter {
  public:
    void put(unsigned bit);
    std::uint64_t bit_count() const { return bits_; }
    // Pads with zeros; safe to call once at the end.
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bits_ = 0;
};

// MSB-first bit source over a fixed buffer. Reads past the end return zero
// and are counted, so the caller can tell legitimate read-ahead from a
// truncated stream.
class BitReader {
  public:
    BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    unsigned next();
    std::uint64_t overrun() const { return overrun_; }

  private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::uint64_t pos_ = 0;
    std::uint64_t overrun_ = 0;
};

// Branch-decision arithmetic coder. 40-bit interval registers; per-decision
// distributions are quantized to 2^16 quanta, each symbol floored at one
// quantum. Quantized frequencies never exceed the model probability, and the
// terminator emits the shortest bit string whose zero-extension lands in the
// final interval, so the whole payload stays within [ideal, ideal + 2) bits
// for every sequence whose model probabilities stay above 2^-16.
namespace coding {
inline constexpr unsigned kPrecisionBits = 40;
inline constexpr unsigned kQuantBits = 16;
inline constexpr std::uint64_t kFull = std::uint64_t{1} << kPrecisionBits;
inline constexpr std::uint64_t kHalf = kFull >> 1;
inline constexpr std::uint64_t kQuarter = kFull >> 2;
inline constexpr std::uint32_t kQuantTotal = 1u << kQuantBits;

// Floor quantization with a one-quantum floor per symbol. Deterministic, so
// encoder and decoder derive identical tables from identical model state.
std::vector<std::uint32_t> quantize(const std::vector<double>& probs);
} // namespace coding

class ArithmeticEncoder {
  public:
    explicit ArithmeticEncoder(BitWriter& out) : out_(&out) {}

    // Codes branch k of the given per-son distribution; a single-son
    // distribution costs no bits.
    void encode_branch(const std::vector<double>& probs, unsigned k);
    void finish();

    double ideal_bits() const { return ideal_bits_; }

  private:
    void put_bit(unsigned bit);
    void renormalize();

    BitWriter* out_;
    std::uint64_t low_ = 0;
    std::uint64_t range_ = coding::kFull;
    std::uint64_t pending_ = 0;
    bool used_ = false;
    double ideal_bits_ = 0.0;
};

class ArithmeticDecoder {
  public:
    explicit ArithmeticDecoder(BitReader& in) : in_(&in) {}

    unsigned decode_branch(const std::vector<double>& probs);

    std::uint64_t overrun() const { return in_->overrun(); }

  private:
    void renormalize();

    BitReader* in_;
    std::uint64_t low_ = 0;
    std::uint64_t range_ = coding::kFull;
    std::uint64_t code_ = 0;
    bool primed_ = false;
};

// Serialized stream layout (bit-exact):
//   magic "TPC1" | version u8 | descriptor length u32 LE | descriptor JSON
//   | symbol count u64 LE | payload bits MSB-first, zero-padded to a byte.
struct EncodeResult {
    std::vector<std::uint8_t> stream;
    std::uint64_t payload_bits = 0;
    double ideal_bits = 0.0;
};

struct DecodeResult {
    std::vector<Letter> letters;
    nlohmann::json descriptor;
};

struct StreamInfo {
    nlohmann::json descriptor;
    std::uint64_t symbol_count = 0;
    std::size_t payload_bytes = 0;
};

// descriptor_override replaces the model's own descriptor in the stream
// header (used to embed side data such as a token dictionary); it must still
// name a predictor the decoder can rebuild.
EncodeResult encode(SequentialModel& model, const std::vector<Letter>& letters,
                    const nlohmann::json* descriptor_override = nullptr);
DecodeResult decode(const std::uint8_t* data, std::size_t size);
StreamInfo stream_info(const std::uint8_t* data, std::size_t size);

} // namespace tpc
