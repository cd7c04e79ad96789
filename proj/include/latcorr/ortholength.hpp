#pragma once

#include <map>
#include <vector>

#include "latcorr/imaginary_quadratic.hpp"
#include "latcorr/pair_correlation.hpp"

namespace latcorr {

// Ortholength spectrum of the cusp neighborhood of the Bianchi quotient for
// the ideal b: lengths ln N(q) over q in b*O_K - {0}, |q| <= N, grouped by
// the exact integer norm.  The multiplicity of a length class is
// numer / unit_count with numer = 2 * sum of phi(q) over the class.
struct OrthoSpectrum {
    const Field* K = nullptr;
    AlgInt gen;
    long long N = 0;
    int unit_count = 0;
    std::vector<long long> norm;   // ascending
    std::vector<double> length;    // ln norm
    std::vector<long long> numer;  // exact multiplicity numerators

    int128 numer_total() const {
        int128 t = 0;
        for (long long v : numer) t += v;
        return t;
    }
};

OrthoSpectrum ortho_spectrum(const Field& K, const AlgInt& b, long long N);

// Pair correlation atoms of the spectrum, diagonal included: the atom at
// length difference ln(n'/n) is keyed by the exact reduced fraction n'/n and
// carries mass numer * numer' / unit_count^2.
struct OrthoPairMeasure {
    int unit_count = 0;
    std::map<Rat, int128> numer; // mass = numer / unit_count^2

    int128 numer_total() const {
        int128 t = 0;
        for (const auto& [k, v] : numer) t += v;
        return t;
    }
};

OrthoPairMeasure ortho_pair_measure(const OrthoSpectrum& spec);

// Binned version of the same measure; bin masses are integer numerators
// divided by the renormalizer (the unit_count^2 denominator cancels under
// probability renormalization).
Hist1D ortho_pair_hist(const OrthoSpectrum& spec, double half, int bins,
                       const RenormSpec& renorm);

// Atomwise comparison of the ortholength pair measure with the Euler-weighted
// logarithm pair measure pushed forward by 2 Re and scaled by 4/unit_count^2.
struct Prop71Report {
    bool equal = false;
    size_t atoms_left = 0, atoms_right = 0, mismatched = 0;
};

Prop71Report verify_prop71(const Field& K, const AlgInt& b, long long N);

} // namespace latcorr
