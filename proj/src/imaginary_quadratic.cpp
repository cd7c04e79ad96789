#include "latcorr/imaginary_quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace latcorr {

namespace {

constexpr double kPi = 3.14159265358979323846;

const Field& field_of(const AlgInt& a) {
    if (a.K == nullptr) throw ValidationError("element carries no field tag");
    return *a.K;
}

long long narrow128(int128 v, const char* what) {
    if (v > (int128)INT64_MAX || v < -(int128)INT64_MAX) throw OverflowError(what);
    return (long long)v;
}

int128 abs128(int128 v) { return v < 0 ? -v : v; }

int128 gcd128(int128 a, int128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

long long mulmod(long long a, long long b, long long n) {
    return (long long)((int128)a * b % n);
}

long long powmod(long long a, long long e, long long n) {
    long long r = 1 % n;
    a %= n;
    while (e > 0) {
        if (e & 1) r = mulmod(r, a, n);
        a = mulmod(a, a, n);
        e >>= 1;
    }
    return r;
}

long long isqrt_ll(long long n) {
    if (n < 0) return -1;
    long long r = (long long)std::sqrt((double)n);
    while (r > 0 && (int128)r * r > n) --r;
    while ((int128)(r + 1) * (r + 1) <= n) ++r;
    return r;
}

} // namespace

int kronecker(long long a, long long n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int result = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    int twos = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++twos;
    }
    if (twos > 0) {
        if (a % 2 == 0) return 0; // (a|2) = 0 regardless of the exponent
        if (twos % 2 == 1) {
            long long am = ((a % 8) + 8) % 8;
            if (am == 3 || am == 5) result = -result;
        }
    }
    // Jacobi symbol (a|n) with n odd positive; periodic in a mod n.
    a = ((a % n) + n) % n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            long long nm = n % 8;
            if (nm == 3 || nm == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

std::vector<long long> primes_up_to(long long n) {
    std::vector<long long> out;
    if (n < 2) return out;
    std::vector<bool> comp((size_t)n + 1, false);
    for (long long i = 2; i <= n; ++i) {
        if (comp[(size_t)i]) continue;
        out.push_back(i);
        for (long long j = i * i; j <= n; j += i) comp[(size_t)j] = true;
    }
    return out;
}

bool is_prime_ll(long long n) {
    if (n < 2) return false;
    for (long long p : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL, 37LL}) {
        if (n % p == 0) return n == p;
    }
    long long d = n - 1;
    int s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    for (long long a : {2LL, 3LL, 5LL, 7LL, 11LL, 13LL, 17LL, 19LL, 23LL, 29LL, 31LL, 37LL}) {
        long long x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

namespace {

long long pollard_rho(long long n) {
    if (n % 2 == 0) return 2;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ (unsigned long long)n);
    for (;;) {
        long long x = (long long)(rng() % (unsigned long long)n);
        long long c = (long long)(rng() % (unsigned long long)(n - 1)) + 1;
        long long y = x, d = 1;
        while (d == 1) {
            x = (mulmod(x, x, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            d = std::gcd(std::abs(x - y), n);
        }
        if (d != n) return d;
    }
}

void factor_rec(long long n, std::vector<long long>& primes) {
    if (n == 1) return;
    if (is_prime_ll(n)) {
        primes.push_back(n);
        return;
    }
    long long d = pollard_rho(n);
    factor_rec(d, primes);
    factor_rec(n / d, primes);
}

} // namespace

std::vector<std::pair<long long, int>> factor_ll(long long n) {
    if (n < 0) n = -n;
    std::vector<std::pair<long long, int>> out;
    if (n <= 1) return out;
    std::vector<long long> primes;
    for (long long d : {2LL, 3LL, 5LL}) {
        while (n % d == 0) {
            primes.push_back(d);
            n /= d;
        }
    }
    for (long long d = 7; d <= 100000 && (int128)d * d <= n; d += 2) {
        while (n % d == 0) {
            primes.push_back(d);
            n /= d;
        }
    }
    if (n > 1) factor_rec(n, primes);
    std::sort(primes.begin(), primes.end());
    for (long long p : primes) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.push_back({p, 1});
    }
    return out;
}

const std::vector<Field>& Field::all() {
    static const std::vector<Field> fields = [] {
        std::vector<Field> v;
        for (long long D : {-3LL, -4LL, -7LL, -8LL, -11LL, -19LL, -43LL, -67LL, -163LL}) {
            long long t = (((D % 4) + 4) % 4 == 1) ? 1 : 0;
            long long n = (t == 1) ? (1 - D) / 4 : -D / 4;
            int u = D == -4 ? 4 : (D == -3 ? 6 : 2);
            v.push_back(Field(D, t, n, u));
        }
        return v;
    }();
    return fields;
}

const Field& Field::by_discriminant(long long D) {
    for (const Field& f : all())
        if (f.discriminant() == D) return f;
    throw UnknownField("no principal imaginary quadratic field with discriminant " + std::to_string(D));
}

AlgInt Field::element(long long x, long long y) const { return AlgInt{x, y, this}; }

std::vector<AlgInt> Field::units() const {
    std::vector<AlgInt> out;
    for (long long x = -1; x <= 1; ++x)
        for (long long y = -1; y <= 1; ++y) {
            AlgInt u{x, y, this};
            if (!u.is_zero() && norm(u) == 1) out.push_back(u);
        }
    return out;
}

Vec2Q Field::embed(const AlgInt& a) const {
    return Vec2Q{Rat(2 * a.x + t_ * a.y, 2), Rat(a.y, 2)};
}

Grid Field::grid(const AlgInt& gen) const { return grid(gen, element(0, 0)); }

Grid Field::grid(const AlgInt& gen, const AlgInt& offset) const {
    if (gen.is_zero()) throw ZeroElement("ideal generator is zero");
    AlgInt gw = mul(gen, element(0, 1));
    return Grid::make(embed(gen), embed(gw), embed(offset), abs_discriminant());
}

void require_same_field(const AlgInt& a, const AlgInt& b) {
    if (&field_of(a) != &field_of(b))
        throw ValidationError("elements belong to different fields");
}

long long norm(const AlgInt& a) {
    const Field& K = field_of(a);
    int128 v = (int128)a.x * a.x + (int128)K.trace_omega() * a.x * a.y +
               (int128)K.norm_omega() * a.y * a.y;
    return narrow128(v, "norm overflows 64 bits");
}

long long trace(const AlgInt& a) { return 2 * a.x + field_of(a).trace_omega() * a.y; }

AlgInt conj(const AlgInt& a) {
    const Field& K = field_of(a);
    return AlgInt{a.x + K.trace_omega() * a.y, -a.y, a.K};
}

AlgInt neg(const AlgInt& a) { return AlgInt{-a.x, -a.y, a.K}; }

AlgInt add(const AlgInt& a, const AlgInt& b) {
    require_same_field(a, b);
    return AlgInt{a.x + b.x, a.y + b.y, a.K};
}

AlgInt sub(const AlgInt& a, const AlgInt& b) {
    require_same_field(a, b);
    return AlgInt{a.x - b.x, a.y - b.y, a.K};
}

AlgInt mul(const AlgInt& a, const AlgInt& b) {
    require_same_field(a, b);
    const Field& K = field_of(a);
    // (x1 + y1 w)(x2 + y2 w) with w^2 = t w - n.
    int128 x = (int128)a.x * b.x - (int128)K.norm_omega() * a.y * b.y;
    int128 y = (int128)a.x * b.y + (int128)a.y * b.x + (int128)K.trace_omega() * a.y * b.y;
    return AlgInt{narrow128(x, "product overflows 64 bits"),
                  narrow128(y, "product overflows 64 bits"), a.K};
}

bool divides(const AlgInt& b, const AlgInt& a) {
    require_same_field(a, b);
    if (b.is_zero()) return a.is_zero();
    const Field& K = field_of(a);
    int128 nb = (int128)b.x * b.x + (int128)K.trace_omega() * b.x * b.y +
                (int128)K.norm_omega() * b.y * b.y;
    // a * conj(b)
    long long cx = b.x + K.trace_omega() * b.y, cy = -b.y;
    int128 ux = (int128)a.x * cx - (int128)K.norm_omega() * a.y * cy;
    int128 uy = (int128)a.x * cy + (int128)a.y * cx + (int128)K.trace_omega() * a.y * cy;
    return ux % nb == 0 && uy % nb == 0;
}

AlgInt div_exact(const AlgInt& a, const AlgInt& b) {
    require_same_field(a, b);
    if (b.is_zero()) throw ZeroElement("division by zero element");
    const Field& K = field_of(a);
    int128 nb = (int128)b.x * b.x + (int128)K.trace_omega() * b.x * b.y +
                (int128)K.norm_omega() * b.y * b.y;
    long long cx = b.x + K.trace_omega() * b.y, cy = -b.y;
    int128 ux = (int128)a.x * cx - (int128)K.norm_omega() * a.y * cy;
    int128 uy = (int128)a.x * cy + (int128)a.y * cx + (int128)K.trace_omega() * a.y * cy;
    if (ux % nb != 0 || uy % nb != 0) throw RuntimeError("element division is not exact");
    return AlgInt{narrow128(ux / nb, "quotient overflows 64 bits"),
                  narrow128(uy / nb, "quotient overflows 64 bits"), a.K};
}

AlgInt element_at(const Field& K, const Grid& g, GridPoint p) {
    if (g.yscale() != K.abs_discriminant())
        throw GeometryMismatch("grid does not embed the requested field");
    Vec2Q v = g.pos(p);
    Rat ye = Rat(2) * v.y;
    Rat xe = v.x - Rat(K.trace_omega()) * v.y;
    if (!ye.is_integer() || !xe.is_integer())
        throw GeometryMismatch("grid position is not an algebraic integer");
    return K.element(xe.num(), ye.num());
}

AlgInt canonical_associate(const AlgInt& a) {
    const Field& K = field_of(a);
    AlgInt best = a;
    for (const AlgInt& u : K.units()) {
        AlgInt c = mul(u, a);
        if (c.x > best.x || (c.x == best.x && c.y > best.y)) best = c;
    }
    return best;
}

PrimeSplit split_prime(const Field& K, long long p) {
    if (p < 2 || !is_prime_ll(p)) throw ValidationError("split_prime requires a rational prime");
    PrimeSplit out;
    out.p = p;
    int chi = kronecker(K.discriminant(), p);
    if (chi == -1) {
        out.type = SplitType::inert;
        out.pi = out.pi_bar = K.element(p, 0);
        out.ideal_norm = narrow128((int128)p * p, "ideal norm overflows 64 bits");
        return out;
    }
    out.type = chi == 0 ? SplitType::ramified : SplitType::split;
    out.ideal_norm = p;
    // Solve x^2 + t x y + n y^2 = p; discriminant in x is 4p - |D| y^2.
    const long long t = K.trace_omega();
    const long long aD = K.abs_discriminant();
    for (long long y = 0;; ++y) {
        int128 disc = (int128)4 * p - (int128)aD * y * y;
        if (disc < 0) break;
        long long r = isqrt_ll(narrow128(disc, "split search range overflows"));
        if ((int128)r * r != disc) continue;
        for (long long root : {r, -r}) {
            if ((root - t * y) % 2 != 0) continue;
            long long x = (root - t * y) / 2;
            AlgInt cand = K.element(x, y);
            if (norm(cand) == p) {
                out.pi = canonical_associate(cand);
                out.pi_bar = canonical_associate(conj(cand));
                return out;
            }
            break; // both roots have the same parity; one check suffices
        }
    }
    throw RuntimeError("no prime element found above " + std::to_string(p));
}

IdealFactorization factor(const AlgInt& a) {
    const Field& K = field_of(a);
    if (a.is_zero()) throw ZeroElement("cannot factor the zero element");
    IdealFactorization out;
    AlgInt rem = a;
    for (auto [p, e] : factor_ll(norm(a))) {
        (void)e;
        PrimeSplit ps = split_prime(K, p);
        std::vector<AlgInt> cands{ps.pi};
        if (ps.pi_bar != ps.pi) cands.push_back(ps.pi_bar);
        for (const AlgInt& pr : cands) {
            int cnt = 0;
            while (divides(pr, rem)) {
                rem = div_exact(rem, pr);
                ++cnt;
            }
            if (cnt > 0) out.factors.push_back({pr, cnt});
        }
    }
    if (norm(rem) != 1) throw RuntimeError("factorization left a non-unit remainder");
    out.unit = rem;
    std::sort(out.factors.begin(), out.factors.end(),
              [](const auto& l, const auto& r) {
                  long long nl = norm(l.first), nr = norm(r.first);
                  if (nl != nr) return nl < nr;
                  if (l.first.x != r.first.x) return l.first.x < r.first.x;
                  return l.first.y < r.first.y;
              });
    return out;
}

long long euler_phi(const AlgInt& a) {
    if (a.is_zero()) throw ZeroElement("euler_phi of zero");
    int128 phi = norm(a);
    for (const auto& [pr, e] : factor(a).factors) {
        (void)e;
        long long q = norm(pr);
        phi = phi / q * (q - 1);
    }
    return narrow128(phi, "euler_phi overflows 64 bits");
}

int moebius(const AlgInt& a) {
    if (a.is_zero()) throw ZeroElement("moebius of zero");
    int distinct = 0;
    for (const auto& [pr, e] : factor(a).factors) {
        (void)pr;
        if (e >= 2) return 0;
        ++distinct;
    }
    return distinct % 2 == 0 ? 1 : -1;
}

namespace {

// g = u*a + v*b with g = gcd(a,b) >= 0.
long long ext_gcd(long long a, long long b, long long& u, long long& v) {
    long long old_r = a, r = b;
    long long old_u = 1, uu = 0;
    long long old_v = 0, vv = 1;
    while (r != 0) {
        long long q = old_r / r;
        long long t;
        t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_u - q * uu;
        old_u = uu;
        uu = t;
        t = old_v - q * vv;
        old_v = vv;
        vv = t;
    }
    if (old_r < 0) {
        old_r = -old_r;
        old_u = -old_u;
        old_v = -old_v;
    }
    u = old_u;
    v = old_v;
    return old_r;
}

} // namespace

std::vector<AlgInt> residues_mod(const AlgInt& q) {
    const Field& K = field_of(q);
    if (q.is_zero()) throw ZeroElement("residues_mod of zero");
    // Columns of the sublattice q*O_K over the basis (1, omega).
    const long long a1 = q.x, b1 = q.y;
    const long long a2 = -K.norm_omega() * q.y, b2 = q.x + K.trace_omega() * q.y;
    long long u, v;
    const long long d1 = ext_gcd(a1, a2, u, v);
    // Second column transformed to (0, d2); |d1*d2| = N(q).
    int128 d2w = (int128)(-a2 / d1) * b1 + (int128)(a1 / d1) * b2;
    long long d2 = narrow128(d2w < 0 ? -d2w : d2w, "residue system too large");
    long long nq = norm(q);
    if ((int128)d1 * d2 != nq) throw RuntimeError("residue normal form is inconsistent");
    std::vector<AlgInt> out;
    out.reserve((size_t)nq);
    for (long long x = 0; x < d1; ++x)
        for (long long y = 0; y < d2; ++y) out.push_back(K.element(x, y));
    return out;
}

bool is_invertible_mod(const AlgInt& r, const AlgInt& q) {
    require_same_field(r, q);
    const Field& K = field_of(q);
    if (q.is_zero()) throw ZeroElement("is_invertible_mod with zero modulus");
    const long long t = K.trace_omega(), n = K.norm_omega();
    // Columns spanning r*O_K + q*O_K.
    const long long cols[4][2] = {
        {r.x, r.y},
        {-n * r.y, r.x + t * r.y},
        {q.x, q.y},
        {-n * q.y, q.x + t * q.y},
    };
    int128 g = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int128 det = (int128)cols[i][0] * cols[j][1] - (int128)cols[i][1] * cols[j][0];
            g = gcd128(g, det);
        }
    return g == 1;
}

double zeta_K_2(const Field& K, double tol) {
    if (!(tol > 0)) throw InvalidTolerance("tolerance must be positive");
    const long long aD = K.abs_discriminant();
    std::vector<int> chi((size_t)aD);
    for (long long i = 0; i < aD; ++i) chi[(size_t)i] = kronecker(K.discriminant(), i);
    // Bounded character prefix sums give the Dirichlet-test tail bound
    // |sum_{n>M} chi(n)/n^2| <= 2P/(M+1)^2 with P = max |prefix sum|.
    long long P = 0, run = 0;
    for (long long i = 0; i < aD; ++i) {
        run += chi[(size_t)i];
        P = std::max(P, std::abs(run));
    }
    const double zeta2 = kPi * kPi / 6;
    long long M = (long long)std::ceil(std::sqrt(2.0 * (double)P * zeta2 / tol)) + aD;
    long double L = 0;
    for (long long nn = M; nn >= 1; --nn)
        L += (long double)chi[(size_t)(nn % aD)] / ((long double)nn * (long double)nn);
    return (double)(zeta2 * L);
}

double mertens_constant_c_m(const AlgInt& m) {
    if (m.is_zero()) throw ZeroElement("mertens constant of zero ideal");
    // N(m) * prod (q+1)/q stays integral when the division runs first.
    int128 c = norm(m);
    for (const auto& [pr, e] : factor(m).factors) {
        (void)e;
        long long q = norm(pr);
        c = c / q * (q + 1);
    }
    return (double)(long double)c;
}

namespace {

// Per-prime-ideal factor of the c_{m,k} Euler product, simplified by the
// four cases of (p | m, p | k); q is the ideal norm.
long double mirsky_factor_specialized(long double q, bool dm, bool dk) {
    if (dm && dk) return (1 - 1 / q) * (1 - 1 / q);
    if (dm) return 1 - 1 / q;
    if (dk) return 1 - 2 / (q * q) + 1 / (q * q * q);
    return 1 - 2 / (q * q);
}

// The same factor assembled literally from the kappa-factor definitions.
long double mirsky_factor_literal(long double q, bool dm, bool dk) {
    const long double g = dm ? q : 1;
    const bool condA = dm ? dk : true;
    const long double front = condA ? 1 - g / (q * q) : 1.0L;
    const long double kap = condA ? 1.0L / (1 - g / (q * q)) : 1.0L;
    const long double kapp = dk ? 1 - 1 / q : 1.0L;
    return front * (1 - kap * kapp * g / (q * q));
}

EulerProduct mirsky_impl(const AlgInt& m, const AlgInt& k, long long prime_bound, bool literal) {
    const Field& K = field_of(m);
    if (m.is_zero()) throw ZeroElement("mirsky constant needs a nonzero modulus ideal");
    if (!k.is_zero()) require_same_field(m, k);
    if (prime_bound < 2) throw ValidationError("prime_bound must be at least 2");

    const bool k_zero = k.is_zero();
    const long long Nm = norm(m);
    const long long Nk = k_zero ? 1 : norm(k);
    long long largest = 1;
    for (auto [p, e] : factor_ll(Nm)) {
        (void)e;
        largest = std::max(largest, p);
    }
    for (auto [p, e] : factor_ll(Nk)) {
        (void)e;
        largest = std::max(largest, p);
    }
    if (largest > prime_bound)
        throw BoundTooSmall("prime_bound " + std::to_string(prime_bound) +
                            " misses the prime factor " + std::to_string(largest));

    const long long aD = K.abs_discriminant();
    std::vector<int> chi((size_t)aD);
    for (long long i = 0; i < aD; ++i) chi[(size_t)i] = kronecker(K.discriminant(), i);

    auto one_factor = [&](long double q, bool dm, bool dk) {
        return literal ? mirsky_factor_literal(q, dm, dk) : mirsky_factor_specialized(q, dm, dk);
    };

    long double prod = 1;
    for (long long p : primes_up_to(prime_bound)) {
        const bool special = Nm % p == 0 || (!k_zero && Nk % p == 0);
        if (!special) {
            const int c = chi[(size_t)(p % aD)];
            const bool dk = k_zero;
            if (c == -1)
                prod *= one_factor((long double)p * p, false, dk);
            else if (c == 0)
                prod *= one_factor((long double)p, false, dk);
            else {
                const long double f = one_factor((long double)p, false, dk);
                prod *= f * f;
            }
        } else {
            PrimeSplit ps = split_prime(K, p);
            if (ps.type == SplitType::inert) {
                prod *= one_factor((long double)ps.ideal_norm, divides(ps.pi, m),
                                   k_zero || divides(ps.pi, k));
            } else {
                std::vector<AlgInt> prs{ps.pi};
                if (ps.type == SplitType::split) prs.push_back(ps.pi_bar);
                for (const AlgInt& pr : prs)
                    prod *= one_factor((long double)p, divides(pr, m),
                                       k_zero || divides(pr, k));
            }
        }
    }
    EulerProduct out;
    out.value = (double)(prod / (long double)Nm);
    out.log_tail_bound = 8.0 / (double)prime_bound;
    return out;
}

} // namespace

EulerProduct mirsky_constant_c_mk(const AlgInt& m, const AlgInt& k, long long prime_bound) {
    return mirsky_impl(m, k, prime_bound, /*literal=*/false);
}

EulerProduct mirsky_constant_c_mk_eq45(const AlgInt& m, const AlgInt& k, long long prime_bound) {
    return mirsky_impl(m, k, prime_bound, /*literal=*/true);
}

EulerProduct limit_constant(const Field& K, long long prime_bound) {
    if (prime_bound < 2) throw ValidationError("prime_bound must be at least 2");
    const long long aD = K.abs_discriminant();
    std::vector<int> chi((size_t)aD);
    for (long long i = 0; i < aD; ++i) chi[(size_t)i] = kronecker(K.discriminant(), i);
    auto one_factor = [](long double q) {
        return (1 - 2 / (q * q)) * (1 + 1 / (q * q * (q * q - 2)));
    };
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
    EulerProduct out;
    out.value = (double)(kPi / (long double)aD * prod);
    out.log_tail_bound = 8.0 / (double)prime_bound;
    return out;
}

} // namespace latcorr
