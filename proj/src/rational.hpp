#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace tpc {

// Exact fraction on 128-bit integers. Only what the rational prediction mode
// needs: construction, multiplication, comparison, conversion. Overflow is
// detected and reported rather than wrapped; path products at the history
// lengths the rational mode supports stay far below the 128-bit limit.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        require(den != 0, ErrorCode::invalid_argument, "rational: zero denominator");
        normalize();
    }

    static Rational one() { return Rational(1, 1); }

    Rational operator*(const Rational& rhs) const {
        // Cross-reduce before multiplying to keep magnitudes small.
        __int128 a = num_, b = den_, c = rhs.num_, d = rhs.den_;
        __int128 g1 = gcd128(a < 0 ? -a : a, d);
        __int128 g2 = gcd128(c < 0 ? -c : c, b);
        a /= g1;
        d /= g1;
        c /= g2;
        b /= g2;
        return Rational(checked_mul(a, c), checked_mul(b, d), raw_tag{});
    }

    Rational& operator*=(const Rational& rhs) {
        *this = *this * rhs;
        return *this;
    }

    bool operator==(const Rational& rhs) const { return num_ == rhs.num_ && den_ == rhs.den_; }
    bool operator!=(const Rational& rhs) const { return !(*this == rhs); }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const { return to_string(num_) + "/" + to_string(den_); }

  private:
    struct raw_tag {};

    Rational(__int128 num, __int128 den, raw_tag) : num_(num), den_(den) { normalize(); }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static __int128 checked_mul(__int128 a, __int128 b) {
        __int128 r;
        require(!__builtin_mul_overflow(a, b, &r), ErrorCode::domain, "rational: 128-bit overflow");
        return r;
    }

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        __int128 g = gcd128(num_ < 0 ? -num_ : num_, den_);
        num_ /= g;
        den_ /= g;
    }

    static std::string to_string(__int128 v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
        std::string s;
        while (u > 0) {
            s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        }
        return neg ? "-" + s : s;
    }

    __int128 num_;
    __int128 den_;
};

} // namespace tpc
