#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "latcorr/rational.hpp"

namespace latcorr {

// Planar vector (x, y*sqrt(s)) with exact rational x, y.  The integer s >= 1
// is carried by the Grid; it lets rings of integers of imaginary quadratic
// fields (y-coordinates rational multiples of sqrt(|D|)) keep exact Gram data.
struct Vec2Q {
    Rat x, y;

    bool is_zero() const { return x.is_zero() && y.is_zero(); }
    friend Vec2Q operator+(const Vec2Q& a, const Vec2Q& b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2Q operator-(const Vec2Q& a, const Vec2Q& b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2Q operator*(long long k, const Vec2Q& v) { return {Rat(k) * v.x, Rat(k) * v.y}; }
    friend bool operator==(const Vec2Q& a, const Vec2Q& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Vec2Q& a, const Vec2Q& b) { return !(a == b); }
};

// <a, b> under the (x, y*sqrt(s)) embedding; exact.
inline Rat dot_q(const Vec2Q& a, const Vec2Q& b, long long s) {
    return a.x * b.x + Rat(s) * (a.y * b.y);
}
inline Rat norm2_q(const Vec2Q& a, long long s) { return dot_q(a, a, s); }
// Plane cross product divided by sqrt(s); exact.
inline Rat cross_q(const Vec2Q& a, const Vec2Q& b) { return a.x * b.y - a.y * b.x; }

// Squared radius for membership tests |p|^2 <= r^2.  Exact whenever the
// square of the given radius fits a 64-bit rational (every double is an exact
// dyadic rational, so integer and small dyadic radii are exact); otherwise a
// documented long-double comparison is used.
class RadiusSq {
public:
    static RadiusSq from_radius(double r) {
        if (!(r >= 0)) throw ValidationError("radius must be nonnegative");
        RadiusSq rs;
        rs.approx_ = (long double)r * (long double)r;
        try {
            Rat rr = Rat::from_double(r);
            rs.r2_ = rr * rr;
            rs.exact_ = true;
        } catch (const OverflowError&) {
            rs.exact_ = false;
        }
        return rs;
    }
    static RadiusSq from_r2(const Rat& r2) {
        if (r2.sign() < 0) throw ValidationError("squared radius must be nonnegative");
        RadiusSq rs;
        rs.r2_ = r2;
        rs.exact_ = true;
        rs.approx_ = (long double)r2.num() / (long double)r2.den();
        return rs;
    }

    bool exact() const { return exact_; }
    const Rat& r2() const { return r2_; }
    double radius() const { return std::sqrt((double)approx_); }
    long double approx() const { return approx_; }

    bool contains_norm2(const Rat& p2) const {
        if (exact_) return p2 <= r2_;
        return (long double)p2.num() / (long double)p2.den() <= approx_;
    }

private:
    Rat r2_;
    bool exact_ = true;
    long double approx_ = 0;
};

// Integer basis coordinates of a grid point: point = offset + m*v1 + n*v2.
struct GridPoint {
    long long m, n;
};

// Translated planar lattice offset + Z v1 + Z v2 with Lagrange-Gauss reduced
// basis: |v1| <= |v2| <= |v2 +- v1| and |v1 + v2| <= |v1 - v2|.  The offset is
// reduced into the fundamental parallelogram {t1 v1 + t2 v2 : ti in [-1/2,1/2)}.
class Grid {
public:
    static Grid make(Vec2Q v1, Vec2Q v2, Vec2Q offset = {}, long long s = 1);

    const Vec2Q& v1() const { return v1_; }
    const Vec2Q& v2() const { return v2_; }
    const Vec2Q& offset() const { return offset_; }
    long long yscale() const { return s_; }
    bool is_lattice() const { return offset_.is_zero(); }

    Rat covol2() const { return covol2_; }
    double covol() const { return covol_; }
    Rat systole2() const { return norm2_q(v1_, s_); }
    double systole() const { return std::sqrt(systole2().to_double()); }
    Rat diam2() const;
    double diam() const { return std::sqrt(diam2().to_double()); }

    Vec2Q pos(GridPoint p) const {
        return offset_ + p.m * v1_ + p.n * v2_;
    }
    Rat norm2_at(GridPoint p) const { return norm2_q(pos(p), s_); }

    // All grid points with |p| <= r, ordered by (m, n) lexicographically.
    // Membership is exact when r^2 is; exclude_zero drops the origin.
    std::vector<GridPoint> disk_points(const RadiusSq& r, bool exclude_zero = false) const;

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.s_ == b.s_ && a.v1_ == b.v1_ && a.v2_ == b.v2_ && a.offset_ == b.offset_;
    }

private:
    Vec2Q v1_, v2_, offset_;
    long long s_ = 1;
    Rat covol2_;
    double covol_ = 0;
};

// Half-open sector C(z, theta, R): points w != 0 with |w| <= R whose angle t
// relative to the direction z satisfies -theta/2 < t <= theta/2.  The angular
// test is evaluated in double precision via atan2 of exact cross/dot values;
// boundary lattice directions at representable angles (multiples of pi/4 and
// the like) resolve exactly, which the tests pin down.
struct Sector {
    double zx = 1, zy = 0; // direction, plane Cartesian coordinates
    double theta = 2 * 3.14159265358979323846;
    RadiusSq r2 = RadiusSq::from_radius(1);
};

std::vector<GridPoint> sector_points(const Grid& g, const Sector& sec);

// Sum of |p|^k over grid points with |p| <= x.  For even k with integral
// norms the sum is exact 128-bit integer arithmetic (converted once at the
// end); otherwise the irrational or fractional summands are accumulated in
// extended precision in canonical point order.
double power_sum(const Grid& g, int k, const RadiusSq& r);

// Leading asymptotic term 2*pi*x^(k+2) / ((k+2) * covol).
double power_sum_asymptotic(const Grid& g, int k, double x);

} // namespace latcorr
