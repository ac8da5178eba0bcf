#include "coder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace tpc {

void BitWriter::put(unsigned bit) {
    const std::size_t byte = static_cast<std::size_t>(bits_ >> 3);
    if (byte == bytes_.size()) bytes_.push_back(0);
    if (bit) bytes_[byte] |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
    ++bits_;
}

unsigned BitReader::next() {
    if (pos_ >= static_cast<std::uint64_t>(size_) * 8) {
        ++overrun_;
        ++pos_;
        return 0;
    }
    const unsigned bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
}

namespace coding {

std::vector<std::uint32_t> quantize(const std::vector<double>& probs) {
    const std::size_t n = probs.size();
    require(n >= 2 && n <= kQuantTotal, ErrorCode::domain,
            "coder: branch fan-out " + std::to_string(n) + " outside [2, 65536]");
    std::vector<std::uint32_t> freqs(n);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        require(probs[i] > 0.0, ErrorCode::domain, "coder: zero predicted probability");
        const double scaled = probs[i] * static_cast<double>(kQuantTotal);
        std::uint32_t f = scaled >= 1.0 ? static_cast<std::uint32_t>(scaled) : 1u;
        f = std::min(f, kQuantTotal - 1);
        freqs[i] = f;
        total += f;
    }
    // Floored sums rarely exceed the budget; when many sub-quantum symbols
    // were bumped to 1 they can. Shave the largest entries first.
    while (total > kQuantTotal) {
        std::size_t largest = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (freqs[i] > freqs[largest]) largest = i;
        require(freqs[largest] > 1, ErrorCode::domain, "coder: branch fan-out exceeds quantizer budget");
        --freqs[largest];
        --total;
    }
    return freqs;
}

} // namespace coding

using namespace coding;

void ArithmeticEncoder::put_bit(unsigned bit) {
    out_->put(bit);
    for (; pending_ > 0; --pending_) out_->put(bit ^ 1u);
}

void ArithmeticEncoder::renormalize() {
    for (;;) {
        if (low_ + range_ <= kHalf) {
            put_bit(0);
        } else if (low_ >= kHalf) {
            put_bit(1);
            low_ -= kHalf;
        } else if (low_ >= kQuarter && low_ + range_ <= kHalf + kQuarter) {
            ++pending_;
            low_ -= kQuarter;
        } else {
            break;
        }
        low_ <<= 1;
        range_ <<= 1;
    }
}

void ArithmeticEncoder::encode_branch(const std::vector<double>& probs, unsigned k) {
    require(k < probs.size(), ErrorCode::invalid_argument, "encode_branch: branch out of range");
    if (probs.size() == 1) return;  // single-son vertex, zero information
    const auto freqs = quantize(probs);
    std::uint32_t cum = 0;
    for (unsigned i = 0; i < k; ++i) cum += freqs[i];
    const std::uint64_t r = range_ >> kQuantBits;
    low_ += r * cum;
    range_ = r * freqs[k];
    ideal_bits_ -= std::log2(probs[k]);
    used_ = true;
    renormalize();
}

void ArithmeticEncoder::finish() {
    if (!used_) return;
    // Shortest value with a zero-extension inside [low, low+range): round low
    // up to a multiple of 2^(B-L) with L = B - bit_width(range) + 1. That
    // multiple is at most low + 2^(bit_width-1) - 1 < low + range.
    const unsigned width = static_cast<unsigned>(std::bit_width(range_));
    const unsigned length = kPrecisionBits - width + 1;
    const unsigned shift = kPrecisionBits - length;
    const std::uint64_t value = ((low_ >> shift) + ((low_ & ((std::uint64_t{1} << shift) - 1)) ? 1 : 0))
                                << shift;
    for (unsigned i = 0; i < length; ++i) put_bit((value >> (kPrecisionBits - 1 - i)) & 1u);
}

void ArithmeticDecoder::renormalize() {
    for (;;) {
        if (low_ + range_ <= kHalf) {
            // nothing
        } else if (low_ >= kHalf) {
            low_ -= kHalf;
            code_ -= kHalf;
        } else if (low_ >= kQuarter && low_ + range_ <= kHalf + kQuarter) {
            low_ -= kQuarter;
            code_ -= kQuarter;
        } else {
            break;
        }
        low_ <<= 1;
        range_ <<= 1;
        code_ = (code_ << 1) | in_->next();
    }
}

unsigned ArithmeticDecoder::decode_branch(const std::vector<double>& probs) {
    if (probs.size() == 1) return 0;
    if (!primed_) {
        for (unsigned i = 0; i < kPrecisionBits; ++i) code_ = (code_ << 1) | in_->next();
        primed_ = true;
    }
    require(code_ >= low_ && code_ - low_ < range_, ErrorCode::decode,
            "decode: code value escaped the coding interval (corrupt payload)");
    const auto freqs = quantize(probs);
    const std::uint64_t r = range_ >> kQuantBits;
    const std::uint64_t target = (code_ - low_) / r;
    std::uint32_t cum = 0;
    unsigned k = 0;
    for (; k < freqs.size(); ++k) {
        if (target < cum + freqs[k]) break;
        cum += freqs[k];
    }
    require(k < freqs.size(), ErrorCode::decode, "decode: code value in dead zone (corrupt payload)");
    low_ += r * cum;
    range_ = r * freqs[k];
    renormalize();
    return k;
}

namespace {

constexpr char kMagic[4] = {'T', 'P', 'C', '1'};
constexpr std::uint8_t kVersion = 1;
// Legitimate decoder read-ahead is strictly less than one register width.
constexpr std::uint64_t kMaxOverrun = kPrecisionBits;

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_u64_le(const std::uint8_t* p, unsigned bytes) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

struct Header {
    nlohmann::json descriptor;
    std::uint64_t symbol_count = 0;
    std::size_t payload_offset = 0;
};

Header parse_header(const std::uint8_t* data, std::size_t size) {
    require(size >= 17, ErrorCode::decode, "stream: shorter than the fixed header");
    require(std::memcmp(data, kMagic, 4) == 0, ErrorCode::decode, "stream: bad magic");
    require(data[4] == kVersion, ErrorCode::decode,
            "stream: unsupported version " + std::to_string(data[4]));
    const std::uint64_t desc_len = read_u64_le(data + 5, 4);
    require(size >= 17 + desc_len, ErrorCode::decode, "stream: descriptor extends past end of data");
    Header h;
    const char* desc_begin = reinterpret_cast<const char*>(data + 9);
    try {
        h.descriptor = nlohmann::json::parse(desc_begin, desc_begin + desc_len);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::decode, std::string("stream: descriptor is not valid JSON: ") + e.what());
    }
    h.symbol_count = read_u64_le(data + 9 + desc_len, 8);
    h.payload_offset = static_cast<std::size_t>(17 + desc_len);
    return h;
}

} // namespace

EncodeResult encode(SequentialModel& model, const std::vector<Letter>& letters,
                    const nlohmann::json* descriptor_override) {
    const std::string desc =
        descriptor_override ? descriptor_override->dump() : model.descriptor().dump();

    BitWriter payload;
    ArithmeticEncoder enc(payload);
    for (Letter a : letters) {
        model.begin_walk();
        for (;;) {
            const auto probs = model.branch_probs();
            const unsigned k = model.branch_toward(a);
            enc.encode_branch(probs, k);
            const auto letter = model.take_branch(k);
            if (letter) {
                require(*letter == a, ErrorCode::invalid_argument, "encode: walk reached the wrong leaf");
                break;
            }
        }
        model.update(a);
    }
    enc.finish();

    EncodeResult result;
    result.payload_bits = payload.bit_count();
    result.ideal_bits = enc.ideal_bits();
    result.stream.reserve(17 + desc.size() + payload.bytes().size());
    result.stream.insert(result.stream.end(), kMagic, kMagic + 4);
    result.stream.push_back(kVersion);
    append_u32_le(result.stream, static_cast<std::uint32_t>(desc.size()));
    result.stream.insert(result.stream.end(), desc.begin(), desc.end());
    append_u64_le(result.stream, letters.size());
    result.stream.insert(result.stream.end(), payload.bytes().begin(), payload.bytes().end());
    return result;
}

DecodeResult decode(const std::uint8_t* data, std::size_t size) {
    const Header header = parse_header(data, size);
    auto model = model_from_json(header.descriptor);

    BitReader payload(data + header.payload_offset, size - header.payload_offset);
    ArithmeticDecoder dec(payload);
    DecodeResult result;
    result.descriptor = header.descriptor;
    result.letters.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(header.symbol_count, 1 << 20)));
    for (std::uint64_t i = 0; i < header.symbol_count; ++i) {
        model->begin_walk();
        for (;;) {
            const auto probs = model->branch_probs();
            const unsigned k = dec.decode_branch(probs);
            const auto letter = model->take_branch(k);
            if (letter) {
                result.letters.push_back(*letter);
                break;
            }
        }
        model->update(result.letters.back());
        require(dec.overrun() < kMaxOverrun, ErrorCode::decode,
                "decode: payload exhausted before the declared symbol count (truncated stream)");
    }
    return result;
}

StreamInfo stream_info(const std::uint8_t* data, std::size_t size) {
    const Header header = parse_header(data, size);
    StreamInfo info;
    info.descriptor = header.descriptor;
    info.symbol_count = header.symbol_count;
    info.payload_bytes = size - header.payload_offset;
    return info;
}

} // namespace tpc
