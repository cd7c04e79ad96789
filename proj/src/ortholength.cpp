#include "latcorr/ortholength.hpp"

#include <cmath>

namespace latcorr {

OrthoSpectrum ortho_spectrum(const Field& K, const AlgInt& b, long long N) {
    if (b.K != &K) throw ValidationError("ideal generator belongs to another field");
    if (b.is_zero()) throw ZeroElement("ideal generator is zero");
    if (N < 1) throw ValidationError("horizon must be at least 1");
    const Grid g = K.grid(b);
    std::map<long long, long long> numer;
    for (const GridPoint& p : g.disk_points(RadiusSq::from_r2(Rat(N) * Rat(N)), true)) {
        const AlgInt q = element_at(K, g, p);
        numer[norm(q)] += 2 * euler_phi(q);
    }
    OrthoSpectrum sp;
    sp.K = &K;
    sp.gen = b;
    sp.N = N;
    sp.unit_count = K.unit_count();
    sp.norm.reserve(numer.size());
    sp.length.reserve(numer.size());
    sp.numer.reserve(numer.size());
    for (const auto& [n, w] : numer) {
        sp.norm.push_back(n);
        sp.length.push_back(std::log((double)n));
        sp.numer.push_back(w);
    }
    return sp;
}

OrthoPairMeasure ortho_pair_measure(const OrthoSpectrum& spec) {
    OrthoPairMeasure out;
    out.unit_count = spec.unit_count;
    const size_t D = spec.norm.size();
    for (size_t a = 0; a < D; ++a) {
        out.numer[Rat(1)] += (int128)spec.numer[a] * spec.numer[a];
        for (size_t b = a + 1; b < D; ++b) {
            const int128 mass = (int128)spec.numer[a] * spec.numer[b];
            out.numer[Rat(spec.norm[b], spec.norm[a])] += mass;
            out.numer[Rat(spec.norm[a], spec.norm[b])] += mass;
        }
    }
    return out;
}

Hist1D ortho_pair_hist(const OrthoSpectrum& spec, double half, int bins,
                       const RenormSpec& renorm) {
    if (bins < 1) throw ValidationError("bin counts must be positive");
    if (!(half > 0) || !std::isfinite(half))
        throw ValidationError("histogram half-extent must be positive and finite");
    const int128 total_numer = spec.numer_total();
    if (total_numer > (int128)3000000000LL)
        throw OverflowError("total multiplicity too large for 64-bit pair masses");
    Hist1D h;
    h.half = half;
    h.n = bins;
    h.diagonal_included = true;
    h.total_raw_mass = total_numer * total_numer;
    h.raw.assign((size_t)bins, 0);
    const size_t D = spec.norm.size();
    for (size_t a = 0; a < D; ++a) {
        const int i0 = fold_bin(0.0, half, bins);
        if (i0 >= 0) h.raw[(size_t)i0] += spec.numer[a] * spec.numer[a];
        for (size_t b = a + 1; b < D; ++b) {
            const long long mass = spec.numer[a] * spec.numer[b];
            const double t = std::log((double)spec.norm[b] / (double)spec.norm[a]);
            const int ip = fold_bin(t, half, bins);
            if (ip >= 0) h.raw[(size_t)ip] += mass;
            const int in = fold_bin(-t, half, bins);
            if (in >= 0) h.raw[(size_t)in] += mass;
        }
    }
    h.renorm_divisor = renorm.divisor(spec.N, 1.0, (long double)h.total_raw_mass);
    h.mass.resize(h.raw.size());
    for (size_t i = 0; i < h.raw.size(); ++i) h.mass[i] = (double)h.raw[i] / h.renorm_divisor;
    return h;
}

Prop71Report verify_prop71(const Field& K, const AlgInt& b, long long N) {
    const OrthoPairMeasure left = ortho_pair_measure(ortho_spectrum(K, b, N));
    const std::map<Rat, int128> push =
        pushforward_2re_atoms(build_logset(K, b, N, WeightKind::euler_phi), true);
    Prop71Report rep;
    rep.atoms_left = left.numer.size();
    rep.atoms_right = push.size();
    auto il = left.numer.begin();
    auto ir = push.begin();
    while (il != left.numer.end() || ir != push.end()) {
        if (il != left.numer.end() && ir != push.end() && il->first == ir->first) {
            if (il->second != 4 * ir->second) ++rep.mismatched;
            ++il;
            ++ir;
        } else if (ir == push.end() ||
                   (il != left.numer.end() && il->first < ir->first)) {
            ++rep.mismatched;
            ++il;
        } else {
            ++rep.mismatched;
            ++ir;
        }
    }
    rep.equal = rep.mismatched == 0;
    return rep;
}

} // namespace latcorr
