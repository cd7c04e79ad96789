#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "latcorr/grid.hpp"
#include "latcorr/imaginary_quadratic.hpp"

namespace latcorr {

// Growth regime of the scaling function, classified by lim psi(N)/N.
enum class Regime { unscaled, sublinear, linear, superlinear };

class ScalingSpec {
public:
    static ScalingSpec constant_one();
    static ScalingSpec power(double alpha); // psi = N^alpha
    static ScalingSpec n_over_log();        // psi = N / ln N
    static ScalingSpec custom(std::function<double(long long)> psi, Regime regime,
                              double lambda = 0);

    double psi(long long N) const; // > 0, validated
    Regime regime() const { return regime_; }
    double lambda() const { return lambda_; } // lim psi/N when linear
    bool diverges() const;                    // psi(N) -> infinity

private:
    enum class Kind { constant_one, power, n_over_log, custom };
    Kind kind_ = Kind::constant_one;
    double alpha_ = 0;
    std::function<double(long long)> fn_;
    Regime regime_ = Regime::unscaled;
    double lambda_ = 0;
};

struct RenormSpec {
    enum class Kind { probability, by_psi, by_n4_over_psi2, by_psi2, by_n6, explicit_value };
    Kind kind = Kind::probability;
    double value = 1; // explicit divisor

    static RenormSpec probability() { return {Kind::probability, 1}; }
    static RenormSpec by_psi() { return {Kind::by_psi, 1}; }
    static RenormSpec by_n4_over_psi2() { return {Kind::by_n4_over_psi2, 1}; }
    static RenormSpec by_psi2() { return {Kind::by_psi2, 1}; }
    static RenormSpec by_n6() { return {Kind::by_n6, 1}; }
    static RenormSpec explicit_value(double v) { return {Kind::explicit_value, v}; }

    double divisor(long long N, double psiN, long double total_raw) const;
};

enum class WeightKind { unit, euler_phi };

// One source point with its exact plane data and cylinder logarithm.
struct LogEntry {
    GridPoint p;
    double x = 0, y = 0; // plane position x + i*y*sqrt(s); exact doubles
    double r2 = 0;       // |z|^2, exact for integral/half-integral data
    double log_re = 0;   // ln |z|
    double log_im = 0;   // arg z in (-pi, pi]
    long long w = 1;
};

struct WeightedLogSet {
    Grid grid;
    long long N = 0;
    WeightKind weight = WeightKind::unit;
    std::vector<LogEntry> entries; // canonical (m, n)-lexicographic order
    int128 sum_w = 0, sum_w2 = 0;

    int128 total_raw_mass(bool diagonal) const {
        return diagonal ? sum_w * sum_w : sum_w * sum_w - sum_w2;
    }
};

// All nonzero source points of modulus <= N.  The Field overload maps basis
// coordinates to ring elements, enabling Euler weights; requesting Euler
// weights for a plain grid throws WeightMismatch.
WeightedLogSet build_logset(const Grid& g, long long N, WeightKind kind);
WeightedLogSet build_logset(const Field& K, const AlgInt& gen, long long N, WeightKind kind);

enum class HistGeom { strip, window };

struct HistSpec {
    HistGeom geom = HistGeom::strip;
    double half = 3; // strip: re half-width X; window: radius A
    int n_re = 60, n_im = 40;
    bool diagonal = false;
};

// Binned pair correlation measure.  Strip geometry covers the cylinder
// [-X, X] x (-pi psi, pi psi] with the im axis split into n_im arcs centered
// at (j - n_im/2) * h, so arc 0 wraps across the seam +-pi psi; window
// geometry is the square [-A, A]^2 with deposits restricted to the closed
// disk |z| <= A (the isometrically embedded window of the varying cylinder).
// Bin masses are exact integer weight sums divided once by the renormalizer;
// total_raw_mass counts every ordered pair, including mass outside the bins.
struct Hist2D {
    HistGeom geom = HistGeom::strip;
    double re_half = 0, im_half = 0;
    int n_re = 0, n_im = 0;
    bool diagonal_included = false;
    double renorm_divisor = 1;
    int128 total_raw_mass = 0;
    std::vector<long long> raw;
    std::vector<double> mass;

    size_t idx(int ire, int iim) const { return (size_t)ire * n_im + iim; }
    double re_lo(int i) const { return -re_half + i * (2 * re_half / n_re); }
    double re_hi(int i) const { return -re_half + (i + 1) * (2 * re_half / n_re); }
    double re_center(int i) const { return -re_half + (i + 0.5) * (2 * re_half / n_re); }
    double im_center(int j) const {
        const double h = 2 * im_half / n_im;
        return geom == HistGeom::strip ? (j - n_im / 2) * h : -im_half + (j + 0.5) * h;
    }
    double im_lo(int j) const {
        const double h = 2 * im_half / n_im;
        return geom == HistGeom::strip ? im_center(j) - h / 2 : -im_half + j * h;
    }
    double im_hi(int j) const {
        const double h = 2 * im_half / n_im;
        return geom == HistGeom::strip ? im_center(j) + h / 2 : -im_half + (j + 1) * h;
    }
    double bin_area() const { return (2 * re_half / n_re) * (2 * im_half / n_im); }
};

struct Hist1D {
    double half = 0;
    int n = 0;
    bool diagonal_included = false;
    double renorm_divisor = 1;
    int128 total_raw_mass = 0;
    std::vector<long long> raw;
    std::vector<double> mass;

    double lo(int i) const { return -half + i * (2 * half / n); }
    double hi(int i) const { return -half + (i + 1) * (2 * half / n); }
    double center(int i) const { return -half + (i + 0.5) * (2 * half / n); }
    double bin_width() const { return 2 * half / n; }
};

// Windowed polar histogram: n_r rings of equal width over [0, r_max] times
// n_theta equal angular sectors.
struct PolarHist {
    double r_max = 0;
    int n_r = 0, n_theta = 0;
    double renorm_divisor = 1;
    int128 total_raw_mass = 0;
    std::vector<long long> raw;
    std::vector<double> mass;

    size_t idx(int ir, int it) const { return (size_t)ir * n_theta + it; }
    double r_lo(int i) const { return i * (r_max / n_r); }
    double r_hi(int i) const { return (i + 1) * (r_max / n_r); }
    double cell_area(int ir) const {
        const double pi = 3.14159265358979323846;
        return pi * (r_hi(ir) * r_hi(ir) - r_lo(ir) * r_lo(ir)) / n_theta;
    }
};

// Mirror-symmetric bin assignment on [-H, H]: values at exactly +-H (or
// outside) are dropped; bin(v) and bin(-v) are exact mirror indices.
int fold_bin(double v, double H, int n);
// Cylinder arc assignment for even n: arcs centered at (k - n/2) * (2H/n),
// seam arc index 0; bin(-v) = (n - bin(v)) mod n exactly.
int wrap_bin(double v, double H, int n);

// Every ordered pair atom psi * (log y - log x) of the set, with both
// orientations visited; diagonal pairs contribute (0, 0, w^2) when enabled.
// Atom coordinates are scaled cylinder coordinates, im in (-pi psi, pi psi].
void for_each_atom_naive(const WeightedLogSet& set, const ScalingSpec& scaling,
                         const std::function<void(double re, double im, long long w)>& sink,
                         bool diagonal = false);

// Same atoms restricted to the closed disk |atom| <= A, enumerated through
// lattice offsets bounded by |p| <= |q| (e^{A/psi} - 1).
void for_each_atom_windowed(const WeightedLogSet& set, const ScalingSpec& scaling, double A,
                            const std::function<void(double re, double im, long long w)>& sink,
                            bool diagonal = false);

Hist2D empirical_naive(const WeightedLogSet& set, const ScalingSpec& scaling,
                       const RenormSpec& renorm, const HistSpec& spec, int workers = 0);

Hist2D empirical_windowed(const WeightedLogSet& set, const ScalingSpec& scaling,
                          const RenormSpec& renorm, const HistSpec& spec, int workers = 0);
Hist2D empirical_windowed(const Grid& g, long long N, const ScalingSpec& scaling,
                          const RenormSpec& renorm, const HistSpec& spec,
                          WeightKind kind = WeightKind::unit, int workers = 0);
Hist2D empirical_windowed(const Field& K, const AlgInt& gen, long long N,
                          const ScalingSpec& scaling, const RenormSpec& renorm,
                          const HistSpec& spec, WeightKind kind, int workers = 0);

PolarHist empirical_windowed_polar(const WeightedLogSet& set, const ScalingSpec& scaling,
                                   const RenormSpec& renorm, double A, int n_r, int n_theta,
                                   bool diagonal = false, int workers = 0);

// Limiting densities.
enum class UnscaledMode { unit, euler };
double density_unscaled(double re, UnscaledMode mode);
double density_poissonian(const Grid& g);
double density_theta_infty(const Grid& g, double lambda, double zx, double zy);

enum class RealMode { r2d, ortho };
double density_real(double t, RealMode mode);

// Euler-weighted linear-scaling density: radial, piecewise constant between
// the circles |z|^2 = N(k); prefix sums make evaluation O(log #circles).
class WeightedLinearDensity {
public:
    WeightedLinearDensity(const Field& K, const AlgInt& gen, double max_radius,
                          long long prime_bound);
    double at_radius(double r) const;
    double operator()(double zx, double zy) const {
        return at_radius(std::sqrt(zx * zx + zy * zy));
    }
    // Squared radii of the density's discontinuity circles (ascending).
    const std::vector<long long>& circle_norms() const { return norms_; }

private:
    std::vector<long long> norms_;
    std::vector<long double> prefix_;
};

double density_weighted_linear(const Field& K, const AlgInt& gen, double zx, double zy,
                               long long prime_bound);

// Histogram vs density comparison.
struct CompareOptions {
    int subsamples = 4;                // per-axis sub-sampling for bin integrals
    bool restrict_to_disk = false;     // window: keep only bins fully inside |z| <= A
    double exclude_center_radius = 0;  // skip bins intersecting this central disk
    double annulus_r_lo = 0, annulus_r_hi = 0; // keep bin centers in [lo, hi] (hi > 0)
    int profile_rings = 0;             // radial profile ring count (0 = off)
    double profile_r_lo = 0, profile_r_hi = 0;
};

struct RingStat {
    double r_lo = 0, r_hi = 0;
    double emp_mean = 0, model_mean = 0;
    long long bins = 0;
};

struct CompareReport {
    double l1 = 0;                   // sum over bins |hist mass - model bin integral|
    double sup_density_dev = 0;      // max per-bin |empirical - model| average density
    double mean_abs_density_dev = 0; // mean of the same deviations
    double emp_mean_density = 0;     // included-bin empirical density mean
    double emp_density_cv = 0;       // coefficient of variation across included bins
    long long bins_included = 0;
    std::vector<RingStat> rings;
};

CompareReport compare(const Hist2D& h, const std::function<double(double, double)>& density,
                      const CompareOptions& opt = {});
CompareReport compare(const Hist1D& h, const std::function<double(double)>& density,
                      const CompareOptions& opt = {});

// Model histograms: bin masses are the same midpoint-quadrature bin integrals
// compare() uses, so comparing an empirical histogram against the model file
// reproduces compare() exactly.  psi fixes the strip height pi * psi.
Hist2D theory_hist2d(const HistSpec& spec, double psi,
                     const std::function<double(double, double)>& density, int subsamples = 4);
Hist1D theory_hist1d(double half, int n, const std::function<double(double)>& density,
                     int subsamples = 4);

// Pushforward by 2*Re: atom at log y - log x maps to ln N(y) - ln N(x),
// recorded exactly as the reduced fraction N(y)/N(x) with integer mass.
std::map<Rat, int128> pushforward_2re_atoms(const WeightedLogSet& set, bool diagonal);
Hist1D pushforward_2re_hist(const WeightedLogSet& set, bool diagonal, double half, int bins,
                            const RenormSpec& renorm);

} // namespace latcorr
