#include "latcorr/arithmetic_sums.hpp"

#include <cmath>

namespace latcorr {

namespace {

constexpr long double kPi = 3.14159265358979323846L;

void check_sector_inputs(const Field& K, const AlgInt& m, const Sector& sec) {
    if (m.K != &K) throw ValidationError("modulus belongs to another field");
    if (m.is_zero()) throw ZeroElement("modulus ideal is zero");
    if (!(sec.r2.approx() >= 1)) throw ValidationError("cutoff x must be at least 1");
}

double finish_ratio(SumReport& r) {
    r.ratio = r.predicted != 0 ? (double)(r.brute / r.predicted) : 0;
    return r.ratio;
}

} // namespace

SumReport mertens_sum(const Field& K, const AlgInt& m, const Sector& sec) {
    check_sector_inputs(K, m, sec);
    const Grid g = K.grid(m);
    int128 acc = 0;
    for (const GridPoint& p : sector_points(g, sec)) acc += euler_phi(element_at(K, g, p));
    SumReport r;
    r.brute = (long double)acc;
    const long double x4 = sec.r2.approx() * sec.r2.approx();
    r.predicted = (long double)sec.theta * x4 /
                  (2 * std::sqrt((long double)K.abs_discriminant()) *
                   (long double)zeta_K_2(K, 1e-12) * (long double)mertens_constant_c_m(m));
    finish_ratio(r);
    return r;
}

SumReport mirsky_sum(const Field& K, const AlgInt& m, const AlgInt& k, const Sector& sec,
                     long long prime_bound) {
    check_sector_inputs(K, m, sec);
    if (!k.is_zero() && k.K != &K) throw ValidationError("shift belongs to another field");
    const Grid g = K.grid(m);
    int128 acc = 0;
    for (const GridPoint& p : sector_points(g, sec)) {
        const AlgInt a = element_at(K, g, p);
        const AlgInt b = add(a, k);
        if (b.is_zero()) continue;
        acc += (int128)euler_phi(a) * euler_phi(b);
    }
    SumReport r;
    r.brute = (long double)acc;
    const long double x2 = sec.r2.approx();
    const long double c = (long double)mirsky_constant_c_mk(m, k, prime_bound).value;
    r.predicted = (long double)sec.theta * c * x2 * x2 * x2 /
                  (3 * std::sqrt((long double)K.abs_discriminant()));
    finish_ratio(r);
    return r;
}

std::map<Rat, int128> r2d_pair_measure(long long d, long long N) {
    if (d < 1 || N < 1) throw ValidationError("d and N must be at least 1");
    std::map<long long, long long> cnt;
    for (long long m = -N; m <= N; ++m) {
        const long long rem = N * N - m * m;
        long long lmax = (long long)std::sqrt((long double)rem / (long double)d);
        while (lmax > 0 && (int128)lmax * lmax * d > rem) --lmax;
        while ((int128)(lmax + 1) * (lmax + 1) * d <= rem) ++lmax;
        for (long long l = -lmax; l <= lmax; ++l) {
            const long long n = m * m + d * l * l;
            if (n >= 1) ++cnt[n];
        }
    }
    std::vector<std::pair<long long, long long>> groups(cnt.begin(), cnt.end());
    std::map<Rat, int128> out;
    for (size_t a = 0; a < groups.size(); ++a) {
        out[Rat(1)] += (int128)groups[a].second * groups[a].second;
        for (size_t b = a + 1; b < groups.size(); ++b) {
            const int128 mass = (int128)groups[a].second * groups[b].second;
            out[Rat(groups[b].first, groups[a].first)] += mass;
            out[Rat(groups[a].first, groups[b].first)] += mass;
        }
    }
    return out;
}

SumReport ideal_count(const Field& K, double y) {
    if (!(y >= 1)) throw ValidationError("y must be at least 1");
    const Grid g = K.grid(K.element(1, 0));
    const auto pts = g.disk_points(RadiusSq::from_r2(Rat::from_double(y)), true);
    const size_t u = (size_t)K.unit_count();
    if (pts.size() % u != 0) throw RuntimeError("unit action is not free on nonzero elements");
    SumReport r;
    r.brute = (long double)(pts.size() / u);
    r.predicted =
        2 * kPi * (long double)y /
        ((long double)u * std::sqrt((long double)K.abs_discriminant()));
    finish_ratio(r);
    return r;
}

SumReport prop65_partial_sum(const Field& K, double x, long long prime_bound) {
    if (!(x >= 1)) throw ValidationError("x must be at least 1");
    if (prime_bound < 2) throw ValidationError("prime bound must be at least 2");
    const Grid g = K.grid(K.element(1, 0));
    long double S = 0;
    for (const GridPoint& p : g.disk_points(RadiusSq::from_r2(Rat::from_double(x)), true)) {
        const AlgInt a = element_at(K, g, p);
        if (!(canonical_associate(a) == a)) continue;
        long double f = 1;
        for (const auto& [pr, e] : factor(a).factors) {
            (void)e;
            const long double q = (long double)norm(pr);
            f *= 1 + 1 / (q * (q * q - 2));
        }
        const long double n = (long double)norm(a);
        S += n * n * n * f;
    }
    const long long aD = K.abs_discriminant();
    std::vector<int> chi((size_t)aD);
    for (long long i = 0; i < aD; ++i) chi[(size_t)i] = kronecker(K.discriminant(), i);
    auto one_factor = [](long double q) { return 1 + 1 / (q * q * (q * q - 2)); };
    long double prod = 1;
    for (long long p : primes_up_to(prime_bound)) {
        const int c = chi[(size_t)(p % aD)];
        if (c == -1)
            prod *= one_factor((long double)p * p);
        else if (c == 0)
            prod *= one_factor((long double)p);
        else {
            const long double f = one_factor((long double)p);
            prod *= f * f;
        }
    }
    const long double C1 = 2 * kPi /
                           ((long double)K.unit_count() *
                            std::sqrt((long double)K.abs_discriminant())) *
                           prod;
    SumReport r;
    r.brute = S;
    r.predicted = C1 / 4 * (long double)x * x * x * x;
    finish_ratio(r);
    return r;
}

} // namespace latcorr
