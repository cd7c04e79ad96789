#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "latcorr/grid.hpp"

namespace latcorr {

// Kronecker symbol (a|n), fully general (n may be zero, negative, even).
int kronecker(long long a, long long n);

std::vector<long long> primes_up_to(long long n);

// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime_ll(long long n);

// Prime factorization of |n| as (prime, exponent) pairs, primes ascending.
// Trial division plus Pollard rho for large cofactors.
std::vector<std::pair<long long, int>> factor_ll(long long n);

struct AlgInt;

// One of the nine imaginary quadratic fields with principal (hence factorial)
// ring of integers O_K = Z + Z*omega, omega = sqrt(D)/2 for D = 0 mod 4 and
// omega = (1+sqrt(D))/2 for D = 1 mod 4.  omega satisfies
// omega^2 = t*omega - n with t = trace(omega), n = N(omega).
class Field {
public:
    static const Field& by_discriminant(long long D); // throws UnknownField
    static const std::vector<Field>& all();

    long long discriminant() const { return D_; }
    long long abs_discriminant() const { return -D_; }
    long long trace_omega() const { return t_; }
    long long norm_omega() const { return n_; }
    int unit_count() const { return units_; }

    AlgInt element(long long x, long long y) const;
    std::vector<AlgInt> units() const;

    // Planar embedding x + y*omega -> (x + ty/2, (y/2)*sqrt(|D|)); grid norms
    // equal field norms exactly (yscale |D|).
    Vec2Q embed(const AlgInt& a) const;

    // The Z-grid offset + gen*O_K in the plane.
    Grid grid(const AlgInt& gen) const;
    Grid grid(const AlgInt& gen, const AlgInt& offset) const;

private:
    Field(long long D, long long t, long long n, int units)
        : D_(D), t_(t), n_(n), units_(units) {}
    long long D_, t_, n_;
    int units_;
};

// Exact element x + y*omega of O_K; carries its field.
struct AlgInt {
    long long x = 0, y = 0;
    const Field* K = nullptr;

    bool is_zero() const { return x == 0 && y == 0; }
    bool is_one() const { return x == 1 && y == 0; }

    friend bool operator==(const AlgInt& a, const AlgInt& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator!=(const AlgInt& a, const AlgInt& b) { return !(a == b); }
};

void require_same_field(const AlgInt& a, const AlgInt& b);

long long norm(const AlgInt& a);
long long trace(const AlgInt& a);
AlgInt conj(const AlgInt& a);
AlgInt neg(const AlgInt& a);
AlgInt add(const AlgInt& a, const AlgInt& b);
AlgInt sub(const AlgInt& a, const AlgInt& b);
AlgInt mul(const AlgInt& a, const AlgInt& b);

// Exact division: b | a iff a*conj(b) has both coordinates divisible by N(b).
bool divides(const AlgInt& b, const AlgInt& a);
AlgInt div_exact(const AlgInt& a, const AlgInt& b); // throws if not divisible

// The ring element whose embedding is g.pos(p); exact inversion of embed.
// Throws GeometryMismatch when the position is not an element of O_K.
AlgInt element_at(const Field& K, const Grid& g, GridPoint p);

// Lexicographically largest associate (on coordinates (x, y)); canonical
// representative of the ideal a*O_K among generators.
AlgInt canonical_associate(const AlgInt& a);

enum class SplitType { split, inert, ramified };

struct PrimeSplit {
    long long p = 0;
    SplitType type = SplitType::inert;
    AlgInt pi;              // canonical prime above p (p itself when inert)
    AlgInt pi_bar;          // second prime for split p; equals pi otherwise
    long long ideal_norm = 0; // p, or p^2 when inert
};

PrimeSplit split_prime(const Field& K, long long p);

struct IdealFactorization {
    AlgInt unit;
    std::vector<std::pair<AlgInt, int>> factors; // canonical primes, norm-then-lex order
};

IdealFactorization factor(const AlgInt& a); // throws ZeroElement on a = 0

long long euler_phi(const AlgInt& a);  // throws ZeroElement
int moebius(const AlgInt& a);          // throws ZeroElement

// Exactly N(q) coset representatives of O_K / q*O_K.
std::vector<AlgInt> residues_mod(const AlgInt& q);

// True iff r generates, together with q, the unit ideal.
bool is_invertible_mod(const AlgInt& r, const AlgInt& q);

// zeta_K(2) = zeta(2) * L(2, chi_D), Dirichlet series truncated so the
// comparison tail bound stays below tol.
double zeta_K_2(const Field& K, double tol);

// c_m = N(m) * prod_{p | m} (1 + 1/N(p)); exact rational, returned as real.
double mertens_constant_c_m(const AlgInt& m);

// Truncated Euler product with a certified bound on the neglected log-tail:
// |log(true) - log(value)| <= log_tail_bound = 8 / prime_bound.
struct EulerProduct {
    double value = 0;
    double log_tail_bound = 0;
};

// Shifted-Euler-correlation constant c_{m,k}.  k = 0 means the zero ideal,
// divisible by every prime.  Throws BoundTooSmall if prime_bound misses a
// prime factor of N(m)*N(k).
EulerProduct mirsky_constant_c_mk(const AlgInt& m, const AlgInt& k, long long prime_bound);

// Same constant evaluated literally from the kappa-factor form; agreement of
// the two routes is a correctness check.
EulerProduct mirsky_constant_c_mk_eq45(const AlgInt& m, const AlgInt& k, long long prime_bound);

// Far-field constant of the Euler-weighted radial profile:
// (pi/|D_K|) * prod_p (1 - 2/N(p)^2)(1 + 1/(N(p)^2 (N(p)^2 - 2))).
EulerProduct limit_constant(const Field& K, long long prime_bound);

} // namespace latcorr
