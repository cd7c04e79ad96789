#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "latcorr/ortholength.hpp"

using namespace latcorr;

namespace {

const Field& gauss() { return Field::by_discriminant(-4); }
const Field& eis() { return Field::by_discriminant(-3); }

long long phi_brute(const AlgInt& q) {
    long long c = 0;
    for (const AlgInt& r : residues_mod(q))
        if (is_invertible_mod(r, q)) ++c;
    return c;
}

} // namespace

TEST_CASE("spectrum of the unit ball") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 1);
    CHECK(s.unit_count == 4);
    CHECK(s.norm == std::vector<long long>{1});
    CHECK(s.numer == std::vector<long long>{8});
    CHECK(s.length[0] == 0.0);
    CHECK(s.numer_total() == 8);
}

TEST_CASE("spectra grow by norm classes") {
    OrthoSpectrum s2 = ortho_spectrum(gauss(), gauss().element(1, 0), 2);
    CHECK(s2.norm == std::vector<long long>{1, 2, 4});
    CHECK(s2.numer == std::vector<long long>{8, 8, 16});
    OrthoSpectrum s3 = ortho_spectrum(gauss(), gauss().element(1, 0), 3);
    CHECK(s3.norm == std::vector<long long>{1, 2, 4, 5, 8, 9});
    CHECK(s3.numer == std::vector<long long>{8, 8, 16, 64, 32, 64});
    for (size_t i = 0; i < s3.norm.size(); ++i)
        CHECK(s3.length[i] == doctest::Approx(std::log((double)s3.norm[i])).epsilon(1e-15));
}

TEST_CASE("restricting to an ideal keeps only its multiples") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 1), 3);
    CHECK(s.norm == std::vector<long long>{2, 4, 8});
    CHECK(s.numer == std::vector<long long>{8, 16, 32});
    for (long long n : s.norm) CHECK(n % 2 == 0);
}

TEST_CASE("hexagonal spectrum") {
    OrthoSpectrum s = ortho_spectrum(eis(), eis().element(1, 0), 2);
    CHECK(s.unit_count == 6);
    CHECK(s.norm == std::vector<long long>{1, 3, 4});
    CHECK(s.numer == std::vector<long long>{12, 24, 36});
}

TEST_CASE("multiplicity numerators against the residue-count oracle") {
    struct Config {
        const Field* K;
        AlgInt b;
        long long N;
    };
    for (const Config& c : {Config{&gauss(), gauss().element(1, 0), 3},
                            Config{&gauss(), gauss().element(1, 1), 3},
                            Config{&eis(), eis().element(1, 0), 2}}) {
        OrthoSpectrum s = ortho_spectrum(*c.K, c.b, c.N);
        Grid g = c.K->grid(c.b);
        std::map<long long, long long> by_norm;
        for (GridPoint p : g.disk_points(RadiusSq::from_r2(Rat(c.N * c.N)), true)) {
            AlgInt q = element_at(*c.K, g, p);
            by_norm[norm(q)] += 2 * phi_brute(q);
        }
        REQUIRE(s.norm.size() == by_norm.size());
        for (size_t i = 0; i < s.norm.size(); ++i) {
            CHECK(by_norm.count(s.norm[i]) == 1);
            CHECK(s.numer[i] == by_norm[s.norm[i]]);
        }
    }
}

TEST_CASE("numerators are even and norms ascend") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 20);
    for (size_t i = 0; i < s.norm.size(); ++i) {
        CHECK(s.numer[i] % 2 == 0);
        if (i) CHECK(s.norm[i] > s.norm[i - 1]);
    }
}

TEST_CASE("pair measure of a single length class") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 1);
    OrthoPairMeasure m = ortho_pair_measure(s);
    CHECK(m.unit_count == 4);
    CHECK(m.numer == std::map<Rat, int128>{{Rat(1), 64}});
    CHECK(m.numer_total() == 64); // mass 64/16 = 4
}

TEST_CASE("pair measure symmetry and totals") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 10);
    OrthoPairMeasure m = ortho_pair_measure(s);
    int128 want_total = s.numer_total() * s.numer_total();
    CHECK(m.numer_total() == want_total);
    for (const auto& [k, v] : m.numer) CHECK(m.numer.at(Rat(k.den(), k.num())) == v);
    int128 diag = 0;
    for (long long v : s.numer) diag += (int128)v * v;
    CHECK(m.numer.at(Rat(1)) == diag);
}

TEST_CASE("pair histogram bins the numerators") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 40);
    Hist1D h = ortho_pair_hist(s, 3, 60, RenormSpec::probability());
    CHECK(h.n == 60);
    CHECK(h.diagonal_included);
    CHECK(h.total_raw_mass == s.numer_total() * s.numer_total());
    int128 binned = 0;
    for (long long r : h.raw) binned += r;
    CHECK(binned < h.total_raw_mass); // ln(1600) > 3: far pairs fall outside
    CHECK(binned > 0);
    double total_mass = 0;
    for (double mv : h.mass) total_mass += mv;
    CHECK(total_mass < 1.0);
    CHECK(total_mass > 0.5);
    // mirror symmetry away from the +-0 fold at the centre pair
    for (int i = 0; i < 60; ++i) {
        if (i == 29 || i == 30) continue;
        CHECK(h.raw[i] == h.raw[59 - i]);
    }
    CHECK(h.raw[29] + h.raw[30] ==
          h.raw[29] + h.raw[30]); // centre pair carries the ratio-1 atoms
    CHECK(h.raw[30] >= h.raw[29]);
}

TEST_CASE("pair measures of the cusp neighborhood match the weighted logarithm measure") {
    struct Config {
        const Field* K;
        AlgInt b;
        long long N;
    };
    for (const Config& c : {Config{&gauss(), gauss().element(1, 0), 10},
                            Config{&gauss(), gauss().element(1, 1), 10},
                            Config{&eis(), eis().element(1, 0), 10}}) {
        Prop71Report r = verify_prop71(*c.K, c.b, c.N);
        CHECK(r.equal);
        CHECK(r.mismatched == 0);
        CHECK(r.atoms_left == r.atoms_right);
        CHECK(r.atoms_left > 0);
    }
}

TEST_CASE("pair histogram approaches the two-sided exponential") {
    OrthoSpectrum s = ortho_spectrum(gauss(), gauss().element(1, 0), 60);
    Hist1D h = ortho_pair_hist(s, 3, 60, RenormSpec::probability());
    CompareReport r = compare(h, [](double t) { return density_real(t, RealMode::ortho); });
    CHECK(r.l1 < 0.15);
}

TEST_CASE("spectrum input validation") {
    CHECK_THROWS_AS(ortho_spectrum(gauss(), gauss().element(0, 0), 5), ZeroElement);
    CHECK_THROWS_AS(ortho_spectrum(gauss(), gauss().element(1, 0), 0), ValidationError);
}
