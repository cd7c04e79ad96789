#pragma once

#include <map>

#include "latcorr/grid.hpp"
#include "latcorr/imaginary_quadratic.hpp"

namespace latcorr {

// Brute-force sum next to its predicted leading term.
struct SumReport {
    long double brute = 0;     // exact integer value where applicable
    long double predicted = 0; // asymptotic leading term
    double ratio = 0;          // brute / predicted when predicted != 0
};

// Sectorial Euler totient sum over m*O_K intersected with the sector; the
// sector's radius is the cutoff x, and the prediction is
// theta x^4 / (2 sqrt|D| zeta_K(2) c_m).
SumReport mertens_sum(const Field& K, const AlgInt& m, const Sector& sec);

// Shifted totient correlation sum phi(a) phi(a + k) over the same range with
// a + k = 0 dropped; prediction theta c_{m,k} x^6 / (3 sqrt|D|).
SumReport mirsky_sum(const Field& K, const AlgInt& m, const AlgInt& k, const Sector& sec,
                     long long prime_bound);

// Pair measure of the representation counts r_{2,d}: atoms at the exact
// reduced ratio m/n with mass r(m) r(n) over 0 < m, n <= N^2, diagonal
// included.
std::map<Rat, int128> r2d_pair_measure(long long d, long long N);

// Number of ideals of norm at most y (associate classes of nonzero
// elements); prediction 2 pi y / (u sqrt|D|).
SumReport ideal_count(const Field& K, double y);

// Partial sum of N(a)^3 f(a) over ideals of norm at most x, where
// f(a) = prod_{p | a} (1 + 1/(Np (Np^2 - 2))); prediction (C1/4) x^4 with the
// Euler product C1 truncated at prime_bound.
SumReport prop65_partial_sum(const Field& K, double x, long long prime_bound);

} // namespace latcorr
