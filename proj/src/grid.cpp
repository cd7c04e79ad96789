#include "latcorr/grid.hpp"

#include <algorithm>
#include <numeric>

namespace latcorr {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool lex_negative(const Vec2Q& v) {
    int sx = v.x.sign();
    return sx < 0 || (sx == 0 && v.y.sign() < 0);
}

long double to_ld(const Rat& r) {
    return (long double)r.num() / (long double)r.den();
}

} // namespace

Grid Grid::make(Vec2Q v1, Vec2Q v2, Vec2Q offset, long long s) {
    if (s < 1) throw ValidationError("grid yscale must be a positive integer");
    if (cross_q(v1, v2).is_zero()) throw DegenerateBasis("grid basis vectors are collinear");

    // Lagrange-Gauss in exact rationals; round-half-up tie-break terminates.
    Rat n1 = norm2_q(v1, s), n2 = norm2_q(v2, s);
    if (n2 < n1) {
        std::swap(v1, v2);
        std::swap(n1, n2);
    }
    for (;;) {
        long long q = (dot_q(v1, v2, s) / n1).round_half_up();
        if (q != 0) {
            v2 = v2 - q * v1;
            n2 = norm2_q(v2, s);
        }
        if (n1 <= n2) break;
        std::swap(v1, v2);
        std::swap(n1, n2);
    }
    // Signs: make v1+v2 the shorter diagonal (<v1,v2> <= 0), then fix the
    // residual sign freedom lexicographically so equal inputs reduce equally.
    Rat d = dot_q(v1, v2, s);
    if (d.sign() > 0) {
        v2 = {-v2.x, -v2.y};
        d = -d;
    }
    if (lex_negative(v1)) {
        v1 = {-v1.x, -v1.y};
        v2 = {-v2.x, -v2.y};
    }
    if (d.is_zero() && lex_negative(v2)) v2 = {-v2.x, -v2.y};

    Grid g;
    g.v1_ = v1;
    g.v2_ = v2;
    g.s_ = s;
    Rat cr = cross_q(v1, v2);
    g.covol2_ = Rat(s) * cr * cr;
    g.covol_ = std::sqrt(g.covol2_.to_double());

    if (!offset.is_zero()) {
        // Coordinates of the offset over the reduced basis, then recenter
        // each into [-1/2, 1/2).
        Rat t1 = cross_q(offset, v2) / cr;
        Rat t2 = cross_q(v1, offset) / cr;
        offset = offset - t1.round_half_up() * v1 - t2.round_half_up() * v2;
    }
    g.offset_ = offset;
    return g;
}

Rat Grid::diam2() const {
    Rat a = norm2_q(v1_ + v2_, s_);
    Rat b = norm2_q(v1_ - v2_, s_);
    return a < b ? b : a;
}

std::vector<GridPoint> Grid::disk_points(const RadiusSq& r, bool exclude_zero) const {
    // |offset + m v1 + n v2|^2 = A m^2 + B mn + C n^2 + D m + E n + F.
    const Rat A = norm2_q(v1_, s_);
    const Rat B = Rat(2) * dot_q(v1_, v2_, s_);
    const Rat C = norm2_q(v2_, s_);
    const Rat D = Rat(2) * dot_q(offset_, v1_, s_);
    const Rat E = Rat(2) * dot_q(offset_, v2_, s_);
    const Rat F = norm2_q(offset_, s_);

    const long double Ad = to_ld(A), Bd = to_ld(B), Cd = to_ld(C);
    const long double Dd = to_ld(D), Ed = to_ld(E), Fd = to_ld(F);
    const long double Td = r.approx();

    // Coefficient ranges: |m| <= (r+|a|)|v2|/covol, |n| <= (r+|a|)|v1|/covol.
    const long double pad = std::sqrt(Td) + std::sqrt(Fd);
    const long double cv = std::sqrt(to_ld(covol2_));
    const long long mmax = (long long)(pad * std::sqrt(Cd) / cv) + 1;
    const long long nmax = (long long)(pad * std::sqrt(Ad) / cv) + 1;

    // Fast path: clear denominators once, evaluate the form in 128-bit
    // integers.  Falls back to per-point rational arithmetic if any scale
    // guard fails; both paths decide membership exactly for exact radii.
    bool fast = true;
    long long L = 1;
    auto fold_den = [&](long long den) {
        if (!fast) return;
        long long g = std::gcd(L, den);
        int128 l = (int128)(L / g) * den;
        if (l > 1000000000000000LL) {
            fast = false;
            return;
        }
        L = (long long)l;
    };
    fold_den(A.den());
    fold_den(B.den());
    fold_den(C.den());
    fold_den(D.den());
    fold_den(E.den());
    fold_den(F.den());
    if (r.exact()) fold_den(r.r2().den());

    int128 Ai = 0, Bi = 0, Ci = 0, Di = 0, Ei = 0, Fi = 0, Ti = 0;
    long double Tf = 0;
    if (fast) {
        Ai = (int128)A.num() * (L / A.den());
        Bi = (int128)B.num() * (L / B.den());
        Ci = (int128)C.num() * (L / C.den());
        Di = (int128)D.num() * (L / D.den());
        Ei = (int128)E.num() * (L / E.den());
        Fi = (int128)F.num() * (L / F.den());
        if (r.exact())
            Ti = (int128)r.r2().num() * (L / r.r2().den());
        else
            Tf = Td * (long double)L;
        // Worst-case magnitude of the scaled form; stay well inside int128.
        long double box = (long double)(std::max(mmax, nmax) + 2);
        long double worst = (std::abs((long double)Ai) + std::abs((long double)Bi) +
                             std::abs((long double)Ci)) *
                                box * box +
                            (std::abs((long double)Di) + std::abs((long double)Ei)) * box +
                            std::abs((long double)Fi);
        if (worst > 1e36L || std::abs((long double)Ti) > 1e36L) fast = false;
    }

    std::vector<GridPoint> out;
    if (Td > 0) out.reserve((size_t)std::min((long double)1e8, 3.6L * Td / (cv * cv) + 8));
    for (long long m = -mmax; m <= mmax; ++m) {
        // Real n-window from C n^2 + (B m + E) n + (A m^2 + D m + F - T) <= 0,
        // padded by one; the exact test below is the authority.
        const long double b = Bd * (long double)m + Ed;
        const long double c0 = (Ad * (long double)m) * (long double)m + Dd * (long double)m + Fd - Td;
        const long double disc = b * b - 4 * Cd * c0;
        long long nlo, nhi;
        if (disc < 0) {
            long double vertex = -b / (2 * Cd);
            vertex = std::clamp(vertex, (long double)(-nmax - 2), (long double)(nmax + 2));
            long long v = (long long)std::llround((double)vertex);
            nlo = v - 1;
            nhi = v + 1;
        } else {
            const long double sq = std::sqrt(disc);
            nlo = (long long)std::floor((double)((-b - sq) / (2 * Cd))) - 1;
            nhi = (long long)std::ceil((double)((-b + sq) / (2 * Cd))) + 1;
        }
        nlo = std::max(nlo, -nmax - 1);
        nhi = std::min(nhi, nmax + 1);
        for (long long n = nlo; n <= nhi; ++n) {
            bool in, zero = false;
            if (fast) {
                int128 q = (Ai * m + Bi * n + Di) * m + (Ci * n + Ei) * n + Fi;
                in = r.exact() ? q <= Ti : (long double)q <= Tf;
                zero = q == 0;
            } else {
                Rat q2 = (A * Rat(m) + B * Rat(n) + D) * Rat(m) + (C * Rat(n) + E) * Rat(n) + F;
                in = r.contains_norm2(q2);
                zero = q2.is_zero();
            }
            if (in && !(exclude_zero && zero)) out.push_back({m, n});
        }
    }
    return out;
}

std::vector<GridPoint> sector_points(const Grid& g, const Sector& sec) {
    if (!(sec.theta > 0) || !(sec.theta <= 2 * kPi))
        throw ValidationError("sector aperture must lie in (0, 2*pi]");
    if (sec.zx == 0 && sec.zy == 0)
        throw ValidationError("sector direction must be nonzero");
    const double half = sec.theta / 2;
    const double ss = std::sqrt((double)g.yscale());
    std::vector<GridPoint> out;
    for (GridPoint p : g.disk_points(sec.r2, /*exclude_zero=*/true)) {
        Vec2Q w = g.pos(p);
        const double wx = w.x.to_double();
        const double wy = w.y.to_double() * ss;
        // +0.0 maps a -0.0 cross product onto the included +pi boundary.
        const double t = std::atan2(sec.zx * wy - sec.zy * wx + 0.0, sec.zx * wx + sec.zy * wy);
        if (t > -half && t <= half) out.push_back(p);
    }
    return out;
}

double power_sum(const Grid& g, int k, const RadiusSq& r) {
    if (k < 0) throw ValidationError("power_sum exponent must be nonnegative");
    const auto pts = g.disk_points(r);
    if (k == 0) return (double)pts.size();

    if (k % 2 == 0) {
        const int half = k / 2;
        int128 acc = 0;
        bool exact_ok = true;
        for (GridPoint p : pts) {
            Rat n2 = g.norm2_at(p);
            if (n2.den() != 1) {
                exact_ok = false;
                break;
            }
            int128 term = 1;
            for (int i = 0; i < half; ++i) {
                if ((long double)term * (long double)n2.num() > 1e36L) {
                    exact_ok = false;
                    break;
                }
                term *= n2.num();
            }
            if (!exact_ok) break;
            acc += term;
            if (acc > (int128)1e37) {
                exact_ok = false;
                break;
            }
        }
        if (exact_ok) return (double)(long double)acc;
    }

    long double acc = 0;
    for (GridPoint p : pts) acc += std::pow(to_ld(g.norm2_at(p)), 0.5L * k);
    return (double)acc;
}

double power_sum_asymptotic(const Grid& g, int k, double x) {
    if (k < 0) throw ValidationError("power_sum exponent must be nonnegative");
    if (!(x > 0)) throw ValidationError("power_sum_asymptotic requires x > 0");
    return 2 * kPi * std::pow(x, k + 2) / ((k + 2) * g.covol());
}

} // namespace latcorr
