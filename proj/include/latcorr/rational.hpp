#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "latcorr/errors.hpp"

namespace latcorr {

using int128 = __int128;

// Exact rational with 64-bit reduced numerator/denominator and 128-bit
// intermediates.  All quantities handled here (basis coordinates, Gram data,
// squared radii) stay far below the 64-bit range after reduction; if a result
// does not, we throw instead of silently wrapping.
class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(long long n) : num_(n), den_(1) {}
    Rat(long long n, long long d) { assign(n, d); }

    static Rat from_int128(int128 n, int128 d) {
        if (d == 0) throw ValidationError("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        Rat r;
        r.num_ = narrow(n);
        r.den_ = narrow(d);
        return r;
    }

    // Exact binary value of a finite double.
    static Rat from_double(double x) {
        if (!std::isfinite(x)) throw ValidationError("non-finite value has no rational form");
        if (x == 0.0) return Rat(0);
        int e = 0;
        double m = std::frexp(x, &e); // x = m * 2^e, |m| in [0.5, 1)
        long long mant = static_cast<long long>(std::ldexp(m, 53));
        e -= 53;
        int128 n = mant, d = 1;
        if (e >= 0) {
            if (e > 62) throw OverflowError("double too large for exact rational");
            n <<= e;
        } else {
            if (-e > 62) throw OverflowError("double too small for exact rational");
            d <<= -e;
        }
        return from_int128(n, d);
    }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    Rat operator-() const { Rat r; r.num_ = -num_; r.den_ = den_; return r; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return from_int128((int128)a.num_ * b.den_ + (int128)b.num_ * a.den_,
                           (int128)a.den_ * b.den_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return from_int128((int128)a.num_ * b.num_, (int128)a.den_ * b.den_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw ValidationError("rational division by zero");
        return from_int128((int128)a.num_ * b.den_, (int128)a.den_ * b.num_);
    }

    Rat& operator+=(const Rat& b) { *this = *this + b; return *this; }
    Rat& operator-=(const Rat& b) { *this = *this - b; return *this; }
    Rat& operator*=(const Rat& b) { *this = *this * b; return *this; }
    Rat& operator/=(const Rat& b) { *this = *this / b; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) {
        return (int128)a.num_ * b.den_ < (int128)b.num_ * a.den_;
    }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
    friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

    // floor(num/den) as an integer
    long long floor() const {
        long long q = num_ / den_, r = num_ % den_;
        return (r < 0) ? q - 1 : q;
    }
    // nearest integer, ties toward +infinity: floor(x + 1/2)
    long long round_half_up() const {
        return (*this + Rat(1, 2)).floor();
    }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    std::string str() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) s += "/" + std::to_string(den_);
        return s;
    }

private:
    long long num_, den_;

    static int128 gcd128(int128 a, int128 b) {
        while (b != 0) { int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }
    static long long narrow(int128 v) {
        if (v > INT64_MAX || v < -INT64_MAX)
            throw OverflowError("rational arithmetic exceeded 64-bit range");
        return static_cast<long long>(v);
    }
    void assign(long long n, long long d) {
        Rat r = from_int128(n, d);
        num_ = r.num_;
        den_ = r.den_;
    }
};

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

} // namespace latcorr
