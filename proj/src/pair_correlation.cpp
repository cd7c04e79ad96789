#include "latcorr/pair_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace latcorr {

namespace {

constexpr double kPi = 3.14159265358979323846;

long long checked_w(int128 v, const char* what) {
    if (v > (int128)std::numeric_limits<long long>::max())
        throw OverflowError(std::string(what) + " exceeds 64-bit range");
    return (long long)v;
}

// Exact pair atom for the ordered pair a -> b, scaled cylinder coordinates.
// The quotient b/a is formed ratio-first: numerator b * conj(a) and
// denominator |a|^2 are exact doubles for integral and half-integral data, so
// the two IEEE divisions are scale covariant and the whole atom is invariant
// under exact rescaling of the source set.
struct AtomCtx {
    double s = 1, sqrt_s = 1, psi = 1;
    double seam = 0; // im value of the cylinder seam, pi * psi
};

inline double atom_re(const AtomCtx& c, const LogEntry& a, const LogEntry& b) {
    return 0.5 * std::log(b.r2 / a.r2) * c.psi;
}

inline double atom_im(const AtomCtx& c, const LogEntry& a, const LogEntry& b) {
    const double br = (a.x * b.x + c.s * (a.y * b.y)) / a.r2;
    const double bi = (a.x * b.y - b.x * a.y) / a.r2;
    return std::atan2(c.sqrt_s * bi + 0.0, br) * c.psi;
}

inline AtomCtx make_ctx(const WeightedLogSet& set, double psi) {
    AtomCtx c;
    c.s = (double)set.grid.yscale();
    c.sqrt_s = std::sqrt(c.s);
    c.psi = psi;
    c.seam = std::atan2(0.0, -1.0) * psi; // same product atom_im yields at the seam
    return c;
}

// Mirror of an im coordinate on the cylinder: the seam +-pi psi is a single
// point and maps to itself, every other value negates exactly.
inline double mirror_im(const AtomCtx& c, double im) { return im == c.seam ? im : -im; }

// Visits each unordered pair with row index in [i0, i1) once, depositing both
// orientations; atoms with |re| > re_cut are skipped before the atan2.
template <class Dep>
void naive_scan(const std::vector<LogEntry>& e, const AtomCtx& c, double re_cut, size_t i0,
                size_t i1, Dep&& dep) {
    const size_t M = e.size();
    for (size_t i = i0; i < i1 && i < M; ++i) {
        const LogEntry a = e[i];
        for (size_t j = i + 1; j < M; ++j) {
            const LogEntry& b = e[j];
            const double re = atom_re(c, a, b);
            if (std::fabs(re) > re_cut) continue;
            const double im = atom_im(c, a, b);
            const long long w = a.w * b.w;
            dep(re, im, w);
            dep(-re, mirror_im(c, im), w);
        }
    }
}

struct WindowPlan {
    std::vector<double> off_nrm2; // ascending
    std::vector<long long> off_dm, off_dn;
    bool dense = false;
    long long m_lo = 0, n_lo = 0, mW = 0, nW = 0;
    std::vector<int32_t> cell;
};

WindowPlan build_window_plan(const WeightedLogSet& set, double max_off_radius) {
    WindowPlan pl;
    if (set.entries.empty() || !(max_off_radius > 0)) return pl;
    const Grid& g = set.grid;
    Grid lat = g.is_lattice() ? g : Grid::make(g.v1(), g.v2(), {}, g.yscale());
    struct Off {
        double nrm2;
        long long dm, dn;
    };
    std::vector<Off> offs;
    for (const GridPoint& p : lat.disk_points(RadiusSq::from_radius(max_off_radius), true)) {
        if (p.m > 0 || (p.m == 0 && p.n > 0))
            offs.push_back({lat.norm2_at(p).to_double(), p.m, p.n});
    }
    std::sort(offs.begin(), offs.end(), [](const Off& a, const Off& b) {
        if (a.nrm2 != b.nrm2) return a.nrm2 < b.nrm2;
        if (a.dm != b.dm) return a.dm < b.dm;
        return a.dn < b.dn;
    });
    pl.off_nrm2.reserve(offs.size());
    pl.off_dm.reserve(offs.size());
    pl.off_dn.reserve(offs.size());
    for (const Off& o : offs) {
        pl.off_nrm2.push_back(o.nrm2);
        pl.off_dm.push_back(o.dm);
        pl.off_dn.push_back(o.dn);
    }
    long long m_hi = set.entries.front().p.m, n_hi = set.entries.front().p.n;
    pl.m_lo = m_hi;
    pl.n_lo = n_hi;
    for (const LogEntry& e : set.entries) {
        pl.m_lo = std::min(pl.m_lo, e.p.m);
        m_hi = std::max(m_hi, e.p.m);
        pl.n_lo = std::min(pl.n_lo, e.p.n);
        n_hi = std::max(n_hi, e.p.n);
    }
    pl.mW = m_hi - pl.m_lo + 1;
    pl.nW = n_hi - pl.n_lo + 1;
    const int128 cells = (int128)pl.mW * pl.nW;
    if (cells <= 100000000 && cells <= 32 * (int128)set.entries.size() + 4096) {
        pl.cell.assign((size_t)cells, -1);
        for (size_t i = 0; i < set.entries.size(); ++i) {
            const GridPoint& p = set.entries[i].p;
            pl.cell[(size_t)((p.m - pl.m_lo) * pl.nW + (p.n - pl.n_lo))] = (int32_t)i;
        }
        pl.dense = true;
    }
    return pl;
}

inline int32_t plan_lookup(const WindowPlan& pl, const std::vector<LogEntry>& e, long long m,
                           long long n) {
    if (pl.dense) {
        const long long im = m - pl.m_lo, in = n - pl.n_lo;
        if (im < 0 || in < 0 || im >= pl.mW || in >= pl.nW) return -1;
        return pl.cell[(size_t)(im * pl.nW + in)];
    }
    size_t lo = 0, hi = e.size();
    while (lo < hi) {
        const size_t mid = (lo + hi) / 2;
        const GridPoint& p = e[mid].p;
        if (p.m < m || (p.m == m && p.n < n))
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < e.size() && e[lo].p.m == m && e[lo].p.n == n) return (int32_t)lo;
    return -1;
}

// Visits each unordered pair whose offset is admissible for the window,
// depositing both orientations of every atom inside the closed disk
// |atom| <= A.  Offsets are lex-positive, so the canonical orientation here
// is identical to the naive scan's.
template <class Dep>
void windowed_scan(const std::vector<LogEntry>& e, const WindowPlan& pl, const AtomCtx& c,
                   double bound_factor, double A, size_t q0, size_t q1, Dep&& dep) {
    const double A2 = A * A;
    for (size_t i = q0; i < q1 && i < e.size(); ++i) {
        const LogEntry a = e[i];
        const double bound = bound_factor * a.r2;
        const size_t cnt =
            std::upper_bound(pl.off_nrm2.begin(), pl.off_nrm2.end(), bound) - pl.off_nrm2.begin();
        for (size_t t = 0; t < cnt; ++t) {
            const int32_t j = plan_lookup(pl, e, a.p.m + pl.off_dm[t], a.p.n + pl.off_dn[t]);
            if (j < 0) continue;
            const LogEntry& b = e[(size_t)j];
            const double re = atom_re(c, a, b);
            if (std::fabs(re) > A) continue;
            const double im = atom_im(c, a, b);
            if (re * re + im * im > A2) continue;
            const long long w = a.w * b.w;
            dep(re, im, w);
            dep(-re, mirror_im(c, im), w);
        }
    }
}

void validate_hist_common(const WeightedLogSet& set, const HistSpec& spec) {
    if (spec.n_re < 1 || spec.n_im < 1) throw ValidationError("bin counts must be positive");
    if (!(spec.half > 0) || !std::isfinite(spec.half))
        throw ValidationError("histogram half-extent must be positive and finite");
    if (set.sum_w > (int128)3000000000LL)
        throw OverflowError("total weight too large for 64-bit pair masses");
}

Hist2D make_hist2d(const WeightedLogSet& set, double psi, const HistSpec& spec) {
    validate_hist_common(set, spec);
    Hist2D h;
    h.geom = spec.geom;
    h.n_re = spec.n_re;
    h.n_im = spec.n_im;
    h.diagonal_included = spec.diagonal;
    if (spec.geom == HistGeom::strip) {
        if (spec.n_im % 2 != 0)
            throw ValidationError("strip histograms need an even im bin count");
        h.re_half = spec.half;
        h.im_half = kPi * psi;
    } else {
        if (spec.half > kPi * psi)
            throw WindowTooLarge("window radius exceeds the cylinder half-circumference");
        h.re_half = h.im_half = spec.half;
    }
    h.raw.assign((size_t)spec.n_re * spec.n_im, 0);
    h.total_raw_mass = set.total_raw_mass(spec.diagonal);
    return h;
}

void finalize_hist(Hist2D& h, const RenormSpec& renorm, long long N, double psi) {
    h.renorm_divisor = renorm.divisor(N, psi, (long double)h.total_raw_mass);
    h.mass.resize(h.raw.size());
    for (size_t i = 0; i < h.raw.size(); ++i) h.mass[i] = (double)h.raw[i] / h.renorm_divisor;
}

int resolve_workers(int workers, size_t jobs) {
    int w = workers > 0 ? workers : (int)std::thread::hardware_concurrency();
    if (w < 1) w = 1;
    if (w > 64) w = 64;
    if ((size_t)w > jobs) w = jobs > 0 ? (int)jobs : 1;
    return w;
}

// Runs fn(chunk_raw, i0, i1) over a partition of [0, M) and sums the integer
// chunk histograms; the merge order is fixed, so results do not depend on the
// worker count.
template <class Fn>
std::vector<long long> run_partitioned(size_t bins, const std::vector<size_t>& cuts, Fn&& fn) {
    const int W = (int)cuts.size() - 1;
    std::vector<std::vector<long long>> raws((size_t)W, std::vector<long long>(bins, 0));
    if (W == 1) {
        fn(raws[0], cuts[0], cuts[1]);
    } else {
        std::vector<std::thread> threads;
        threads.reserve((size_t)W);
        for (int w = 0; w < W; ++w)
            threads.emplace_back([&, w] { fn(raws[(size_t)w], cuts[(size_t)w], cuts[(size_t)w + 1]); });
        for (auto& t : threads) t.join();
    }
    std::vector<long long> total(bins, 0);
    for (int w = 0; w < W; ++w)
        for (size_t i = 0; i < bins; ++i) total[i] += raws[(size_t)w][i];
    return total;
}

// Row cuts balancing the triangular pair counts of the naive scan.
std::vector<size_t> triangle_cuts(size_t M, int W) {
    std::vector<size_t> cuts{0};
    if (W <= 1 || M < 2) {
        cuts.push_back(M);
        return cuts;
    }
    const long double total = (long double)M * (M - 1) / 2;
    long double acc = 0;
    int next = 1;
    for (size_t i = 0; i < M && next < W; ++i) {
        acc += (long double)(M - 1 - i);
        if (acc >= total * next / W) {
            cuts.push_back(i + 1);
            ++next;
        }
    }
    while ((int)cuts.size() < W) cuts.push_back(M);
    cuts.push_back(M);
    return cuts;
}

std::vector<size_t> even_cuts(size_t M, int W) {
    std::vector<size_t> cuts;
    for (int w = 0; w <= W; ++w) cuts.push_back(M * (size_t)w / (size_t)W);
    return cuts;
}

void deposit_diagonal_2d(Hist2D& h, const WeightedLogSet& set) {
    if (!h.diagonal_included) return;
    const long long w2 = checked_w(set.sum_w2, "diagonal mass");
    const int ire = fold_bin(0.0, h.re_half, h.n_re);
    if (ire < 0) return;
    const int iim = h.geom == HistGeom::strip ? wrap_bin(0.0, h.im_half, h.n_im)
                                              : fold_bin(0.0, h.im_half, h.n_im);
    if (iim < 0) return;
    h.raw[h.idx(ire, iim)] += w2;
}

double window_bound_factor(double A, double psi) {
    const double rho = std::expm1(A / psi) * (1 + 1e-9);
    return rho * rho;
}

} // namespace

// ---------------------------------------------------------------------------
// ScalingSpec / RenormSpec

ScalingSpec ScalingSpec::constant_one() {
    ScalingSpec s;
    s.kind_ = Kind::constant_one;
    s.regime_ = Regime::unscaled;
    return s;
}

ScalingSpec ScalingSpec::power(double alpha) {
    if (!(alpha >= 0) || !std::isfinite(alpha))
        throw ValidationError("scaling exponent must be finite and nonnegative");
    ScalingSpec s;
    s.kind_ = Kind::power;
    s.alpha_ = alpha;
    s.regime_ = alpha == 0  ? Regime::unscaled
                : alpha < 1 ? Regime::sublinear
                : alpha == 1 ? Regime::linear
                             : Regime::superlinear;
    s.lambda_ = alpha == 1 ? 1 : 0;
    return s;
}

ScalingSpec ScalingSpec::n_over_log() {
    ScalingSpec s;
    s.kind_ = Kind::n_over_log;
    s.regime_ = Regime::sublinear;
    return s;
}

ScalingSpec ScalingSpec::custom(std::function<double(long long)> psi, Regime regime,
                                double lambda) {
    if (!psi) throw ValidationError("custom scaling needs a function");
    if (regime == Regime::linear && !(lambda > 0))
        throw ValidationError("linear scaling needs a positive lambda");
    ScalingSpec s;
    s.kind_ = Kind::custom;
    s.fn_ = std::move(psi);
    s.regime_ = regime;
    s.lambda_ = regime == Regime::linear ? lambda : 0;
    return s;
}

double ScalingSpec::psi(long long N) const {
    if (N < 1) throw ValidationError("horizon must be at least 1");
    double v = 1;
    switch (kind_) {
    case Kind::constant_one: v = 1; break;
    case Kind::power: v = std::pow((double)N, alpha_); break;
    case Kind::n_over_log:
        if (N < 2) throw ValidationError("N / log N scaling needs N >= 2");
        v = (double)N / std::log((double)N);
        break;
    case Kind::custom: v = fn_(N); break;
    }
    if (!(v > 0) || !std::isfinite(v))
        throw ValidationError("scaling function must be positive and finite");
    return v;
}

bool ScalingSpec::diverges() const { return regime_ != Regime::unscaled; }

double RenormSpec::divisor(long long N, double psiN, long double total_raw) const {
    double d = 1;
    switch (kind) {
    case Kind::probability: d = (double)total_raw; break;
    case Kind::by_psi: d = psiN; break;
    case Kind::by_n4_over_psi2: d = std::pow((double)N, 4) / (psiN * psiN); break;
    case Kind::by_psi2: d = psiN * psiN; break;
    case Kind::by_n6: d = std::pow((double)N, 6); break;
    case Kind::explicit_value: d = value; break;
    }
    if (!(d > 0) || !std::isfinite(d)) throw ValidationError("renormalizer must be positive");
    return d;
}

// ---------------------------------------------------------------------------
// Log sets

namespace {

void push_entry(WeightedLogSet& set, const Grid& g, GridPoint p, long long w, double sqrt_s) {
    Vec2Q v = g.pos(p);
    LogEntry e;
    e.p = p;
    e.x = v.x.to_double();
    e.y = v.y.to_double();
    e.r2 = g.norm2_at(p).to_double();
    e.log_re = 0.5 * std::log(e.r2);
    e.log_im = std::atan2(sqrt_s * e.y + 0.0, e.x);
    e.w = w;
    set.entries.push_back(e);
    set.sum_w += w;
    set.sum_w2 += (int128)w * w;
}

RadiusSq horizon_radius(long long N) {
    if (N < 1) throw ValidationError("horizon must be at least 1");
    return RadiusSq::from_r2(Rat(N) * Rat(N));
}

} // namespace

WeightedLogSet build_logset(const Grid& g, long long N, WeightKind kind) {
    if (kind == WeightKind::euler_phi)
        throw WeightMismatch("Euler weights need a number-field source");
    WeightedLogSet set;
    set.grid = g;
    set.N = N;
    set.weight = kind;
    const double sqrt_s = std::sqrt((double)g.yscale());
    auto pts = g.disk_points(horizon_radius(N), true);
    set.entries.reserve(pts.size());
    for (const GridPoint& p : pts) push_entry(set, g, p, 1, sqrt_s);
    return set;
}

WeightedLogSet build_logset(const Field& K, const AlgInt& gen, long long N, WeightKind kind) {
    if (gen.K != &K) throw ValidationError("generator belongs to another field");
    if (gen.is_zero()) throw ZeroElement("grid generator must be nonzero");
    WeightedLogSet set;
    set.grid = K.grid(gen);
    set.N = N;
    set.weight = kind;
    const double sqrt_s = std::sqrt((double)set.grid.yscale());
    auto pts = set.grid.disk_points(horizon_radius(N), true);
    set.entries.reserve(pts.size());
    for (const GridPoint& p : pts) {
        long long w = 1;
        if (kind == WeightKind::euler_phi) w = euler_phi(element_at(K, set.grid, p));
        push_entry(set, set.grid, p, w, sqrt_s);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Binning

int fold_bin(double v, double H, int n) {
    if (!(v > -H && v < H)) return -1;
    const double h = 2 * H / n;
    if (n % 2 == 0) {
        if (v >= 0) {
            const int i = n / 2 + (int)(v / h);
            return i < n ? i : n - 1;
        }
        const int i = n / 2 - 1 - (int)(-v / h);
        return i >= 0 ? i : 0;
    }
    const int mid = n / 2;
    if (v >= 0) {
        const int i = mid + (int)(v / h + 0.5);
        return i < n ? i : n - 1;
    }
    const int i = mid - (int)(-v / h + 0.5);
    return i >= 0 ? i : 0;
}

int wrap_bin(double v, double H, int n) {
    if (v <= -H)
        v += 2 * H;
    else if (v > H)
        v -= 2 * H;
    const double h = 2 * H / n;
    const long long k = v >= 0 ? (long long)(v / h + 0.5) : -(long long)(-v / h + 0.5);
    return (int)((((k + n / 2) % n) + n) % n);
}

// ---------------------------------------------------------------------------
// Atom visitors

void for_each_atom_naive(const WeightedLogSet& set, const ScalingSpec& scaling,
                         const std::function<void(double, double, long long)>& sink,
                         bool diagonal) {
    const AtomCtx c = make_ctx(set, scaling.psi(set.N));
    naive_scan(set.entries, c, std::numeric_limits<double>::infinity(), 0, set.entries.size(),
               sink);
    if (diagonal)
        for (const LogEntry& e : set.entries) sink(0.0, 0.0, e.w * e.w);
}

void for_each_atom_windowed(const WeightedLogSet& set, const ScalingSpec& scaling, double A,
                            const std::function<void(double, double, long long)>& sink,
                            bool diagonal) {
    if (!(A > 0) || !std::isfinite(A)) throw ValidationError("window radius must be positive");
    const double psi = scaling.psi(set.N);
    if (A > kPi * psi)
        throw WindowTooLarge("window radius exceeds the cylinder half-circumference");
    const AtomCtx c = make_ctx(set, psi);
    const double rho = std::expm1(A / psi) * (1 + 1e-9);
    WindowPlan pl = build_window_plan(set, (double)set.N * rho);
    windowed_scan(set.entries, pl, c, window_bound_factor(A, psi), A, 0, set.entries.size(),
                  sink);
    if (diagonal)
        for (const LogEntry& e : set.entries) sink(0.0, 0.0, e.w * e.w);
}

// ---------------------------------------------------------------------------
// Empirical histograms

Hist2D empirical_naive(const WeightedLogSet& set, const ScalingSpec& scaling,
                       const RenormSpec& renorm, const HistSpec& spec, int workers) {
    const double psi = scaling.psi(set.N);
    Hist2D h = make_hist2d(set, psi, spec);
    const AtomCtx c = make_ctx(set, psi);
    const size_t M = set.entries.size();
    const size_t bins = h.raw.size();
    const int W = resolve_workers(workers, M);
    const auto cuts = triangle_cuts(M, W);
    const double re_half = h.re_half, im_half = h.im_half;
    const int n_re = h.n_re, n_im = h.n_im;
    if (spec.geom == HistGeom::strip) {
        h.raw = run_partitioned(bins, cuts, [&](std::vector<long long>& raw, size_t i0, size_t i1) {
            naive_scan(set.entries, c, re_half, i0, i1, [&](double re, double im, long long w) {
                const int ire = fold_bin(re, re_half, n_re);
                if (ire < 0) return;
                raw[(size_t)ire * n_im + wrap_bin(im, im_half, n_im)] += w;
            });
        });
    } else {
        const double A = spec.half, A2 = A * A;
        h.raw = run_partitioned(bins, cuts, [&](std::vector<long long>& raw, size_t i0, size_t i1) {
            naive_scan(set.entries, c, A, i0, i1, [&](double re, double im, long long w) {
                if (re * re + im * im > A2) return;
                const int ire = fold_bin(re, A, n_re);
                if (ire < 0) return;
                const int iim = fold_bin(im, A, n_im);
                if (iim < 0) return;
                raw[(size_t)ire * n_im + iim] += w;
            });
        });
    }
    deposit_diagonal_2d(h, set);
    finalize_hist(h, renorm, set.N, psi);
    return h;
}

Hist2D empirical_windowed(const WeightedLogSet& set, const ScalingSpec& scaling,
                          const RenormSpec& renorm, const HistSpec& spec, int workers) {
    if (spec.geom != HistGeom::window)
        throw ValidationError("windowed evaluation needs window geometry");
    const double psi = scaling.psi(set.N);
    Hist2D h = make_hist2d(set, psi, spec);
    const AtomCtx c = make_ctx(set, psi);
    const double A = spec.half;
    const double rho = std::expm1(A / psi) * (1 + 1e-9);
    const WindowPlan pl = build_window_plan(set, (double)set.N * rho);
    const size_t M = set.entries.size();
    const size_t bins = h.raw.size();
    const int W = resolve_workers(workers, M);
    const auto cuts = even_cuts(M, W);
    const double bf = window_bound_factor(A, psi);
    const int n_re = h.n_re, n_im = h.n_im;
    h.raw = run_partitioned(bins, cuts, [&](std::vector<long long>& raw, size_t q0, size_t q1) {
        windowed_scan(set.entries, pl, c, bf, A, q0, q1, [&](double re, double im, long long w) {
            const int ire = fold_bin(re, A, n_re);
            if (ire < 0) return;
            const int iim = fold_bin(im, A, n_im);
            if (iim < 0) return;
            raw[(size_t)ire * n_im + iim] += w;
        });
    });
    deposit_diagonal_2d(h, set);
    finalize_hist(h, renorm, set.N, psi);
    return h;
}

Hist2D empirical_windowed(const Grid& g, long long N, const ScalingSpec& scaling,
                          const RenormSpec& renorm, const HistSpec& spec, WeightKind kind,
                          int workers) {
    return empirical_windowed(build_logset(g, N, kind), scaling, renorm, spec, workers);
}

Hist2D empirical_windowed(const Field& K, const AlgInt& gen, long long N,
                          const ScalingSpec& scaling, const RenormSpec& renorm,
                          const HistSpec& spec, WeightKind kind, int workers) {
    return empirical_windowed(build_logset(K, gen, N, kind), scaling, renorm, spec, workers);
}

PolarHist empirical_windowed_polar(const WeightedLogSet& set, const ScalingSpec& scaling,
                                   const RenormSpec& renorm, double A, int n_r, int n_theta,
                                   bool diagonal, int workers) {
    if (n_r < 1 || n_theta < 1) throw ValidationError("bin counts must be positive");
    if (!(A > 0) || !std::isfinite(A)) throw ValidationError("window radius must be positive");
    if (set.sum_w > (int128)3000000000LL)
        throw OverflowError("total weight too large for 64-bit pair masses");
    const double psi = scaling.psi(set.N);
    if (A > kPi * psi)
        throw WindowTooLarge("window radius exceeds the cylinder half-circumference");
    PolarHist h;
    h.r_max = A;
    h.n_r = n_r;
    h.n_theta = n_theta;
    h.raw.assign((size_t)n_r * n_theta, 0);
    h.total_raw_mass = set.total_raw_mass(diagonal);
    const AtomCtx c = make_ctx(set, psi);
    const double rho = std::expm1(A / psi) * (1 + 1e-9);
    const WindowPlan pl = build_window_plan(set, (double)set.N * rho);
    const size_t M = set.entries.size();
    const size_t bins = h.raw.size();
    const int W = resolve_workers(workers, M);
    const auto cuts = even_cuts(M, W);
    const double bf = window_bound_factor(A, psi);
    const double hr = A / n_r, ht = 2 * kPi / n_theta;
    auto dep = [&](std::vector<long long>& raw, double re, double im, long long w) {
        const double r = std::sqrt(re * re + im * im);
        int ir = (int)(r / hr);
        if (ir >= n_r) ir = n_r - 1;
        int it = (int)((std::atan2(im, re) + kPi) / ht);
        if (it >= n_theta) it = 0;
        raw[(size_t)ir * n_theta + it] += w;
    };
    h.raw = run_partitioned(bins, cuts, [&](std::vector<long long>& raw, size_t q0, size_t q1) {
        windowed_scan(set.entries, pl, c, bf, A, q0, q1,
                      [&](double re, double im, long long w) { dep(raw, re, im, w); });
    });
    if (diagonal) {
        const long long w2 = checked_w(set.sum_w2, "diagonal mass");
        const int it = (int)((std::atan2(0.0, 0.0) + kPi) / ht);
        h.raw[(size_t)0 * n_theta + (it >= n_theta ? 0 : it)] += w2;
    }
    h.renorm_divisor = renorm.divisor(set.N, psi, (long double)h.total_raw_mass);
    h.mass.resize(h.raw.size());
    for (size_t i = 0; i < h.raw.size(); ++i) h.mass[i] = (double)h.raw[i] / h.renorm_divisor;
    return h;
}

// ---------------------------------------------------------------------------
// Densities

double density_unscaled(double re, UnscaledMode mode) {
    return mode == UnscaledMode::unit ? std::exp(-2 * std::fabs(re)) / (2 * kPi)
                                      : std::exp(-4 * std::fabs(re)) / kPi;
}

double density_poissonian(const Grid& g) { return kPi / (2 * g.covol2().to_double()); }

double density_theta_infty(const Grid& g, double lambda, double zx, double zy) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw ValidationError("lambda must be positive and finite");
    const double r2 = zx * zx + zy * zy;
    if (r2 == 0) return 0;
    const double r = std::sqrt(r2);
    const double S = power_sum(g, 2, RadiusSq::from_radius(r / lambda));
    return S / (g.covol() * r2 * r2);
}

double density_real(double t, RealMode mode) {
    return mode == RealMode::r2d ? 0.5 * std::exp(-std::fabs(t)) : std::exp(-2 * std::fabs(t));
}

WeightedLinearDensity::WeightedLinearDensity(const Field& K, const AlgInt& gen,
                                             double max_radius, long long prime_bound) {
    if (gen.K != &K) throw ValidationError("generator belongs to another field");
    if (gen.is_zero()) throw ZeroElement("grid generator must be nonzero");
    if (!(max_radius >= 0) || !std::isfinite(max_radius))
        throw ValidationError("radius must be nonnegative and finite");
    if (prime_bound < 2) throw ValidationError("prime bound must be at least 2");
    const Grid g = K.grid(gen);
    const long double sqD = std::sqrt((long double)K.abs_discriminant());
    std::map<long long, long double> circles;
    std::map<std::pair<long long, long long>, long double> memo;
    for (const GridPoint& p : g.disk_points(RadiusSq::from_radius(max_radius), true)) {
        const AlgInt k = element_at(K, g, p);
        const AlgInt kc = canonical_associate(k);
        const auto key = std::make_pair(kc.x, kc.y);
        auto it = memo.find(key);
        if (it == memo.end())
            it = memo.emplace(key, mirsky_constant_c_mk(gen, kc, prime_bound).value).first;
        const long double n = (long double)norm(k);
        circles[norm(k)] += 2 * it->second * n * n * n / sqD;
    }
    norms_.reserve(circles.size());
    prefix_.reserve(circles.size());
    long double acc = 0;
    for (const auto& [n, wsum] : circles) {
        acc += wsum;
        norms_.push_back(n);
        prefix_.push_back(acc);
    }
}

double WeightedLinearDensity::at_radius(double r) const {
    if (!(r > 0)) return 0;
    const long double r2 = (long double)r * r;
    size_t lo = 0, hi = norms_.size();
    while (lo < hi) {
        const size_t mid = (lo + hi) / 2;
        if ((long double)norms_[mid] <= r2)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo == 0) return 0;
    const long double r4 = r2 * r2;
    return (double)(prefix_[lo - 1] / (r4 * r4));
}

double density_weighted_linear(const Field& K, const AlgInt& gen, double zx, double zy,
                               long long prime_bound) {
    const double r = std::sqrt(zx * zx + zy * zy);
    return WeightedLinearDensity(K, gen, r, prime_bound).at_radius(r);
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

struct BinGeomView {
    double re_lo, re_hi, im_lo, im_hi;
};

void accumulate_compare(CompareReport& rep, double mass, double integral, double area,
                        double rc, long double& sum_d, long double& sum_d2,
                        std::vector<RingStat>& rings, double ring_lo, double ring_w) {
    const double diff = mass - integral;
    rep.l1 += std::fabs(diff);
    const double dev = std::fabs(diff) / area;
    rep.sup_density_dev = std::max(rep.sup_density_dev, dev);
    rep.mean_abs_density_dev += dev;
    ++rep.bins_included;
    const double emp_d = mass / area;
    sum_d += emp_d;
    sum_d2 += (long double)emp_d * emp_d;
    if (!rings.empty() && ring_w > 0 && rc >= ring_lo) {
        const size_t r = (size_t)((rc - ring_lo) / ring_w);
        if (r < rings.size() && rc <= rings[r].r_hi) {
            rings[r].emp_mean += emp_d;
            rings[r].model_mean += integral / area;
            ++rings[r].bins;
        }
    }
}

void finish_compare(CompareReport& rep, long double sum_d, long double sum_d2,
                    std::vector<RingStat>&& rings) {
    if (rep.bins_included > 0) {
        rep.mean_abs_density_dev /= (double)rep.bins_included;
        const long double mean = sum_d / rep.bins_included;
        rep.emp_mean_density = (double)mean;
        const long double var = sum_d2 / rep.bins_included - mean * mean;
        rep.emp_density_cv = mean > 0 ? (double)(std::sqrt(std::max((long double)0, var)) / mean) : 0;
    }
    for (RingStat& r : rings)
        if (r.bins > 0) {
            r.emp_mean /= (double)r.bins;
            r.model_mean /= (double)r.bins;
        }
    rep.rings = std::move(rings);
}

std::vector<RingStat> init_rings(const CompareOptions& opt) {
    std::vector<RingStat> rings;
    if (opt.profile_rings > 0 && opt.profile_r_hi > opt.profile_r_lo) {
        const double w = (opt.profile_r_hi - opt.profile_r_lo) / opt.profile_rings;
        for (int i = 0; i < opt.profile_rings; ++i)
            rings.push_back({opt.profile_r_lo + i * w, opt.profile_r_lo + (i + 1) * w, 0, 0, 0});
    }
    return rings;
}

} // namespace

CompareReport compare(const Hist2D& h, const std::function<double(double, double)>& density,
                      const CompareOptions& opt) {
    if (opt.subsamples < 1) throw ValidationError("subsample count must be positive");
    CompareReport rep;
    std::vector<RingStat> rings = init_rings(opt);
    const double ring_lo = opt.profile_r_lo;
    const double ring_w =
        rings.empty() ? 0 : (opt.profile_r_hi - opt.profile_r_lo) / (double)rings.size();
    const int S = opt.subsamples;
    long double sum_d = 0, sum_d2 = 0;
    const double A = h.re_half;
    for (int i = 0; i < h.n_re; ++i) {
        for (int j = 0; j < h.n_im; ++j) {
            const double relo = h.re_lo(i), rehi = h.re_hi(i);
            const double imlo = h.im_lo(j), imhi = h.im_hi(j);
            const double cre = h.re_center(i), cim = h.im_center(j);
            const double rc = std::sqrt(cre * cre + cim * cim);
            if (h.geom == HistGeom::window) {
                if (opt.restrict_to_disk) {
                    const double mre = std::max(std::fabs(relo), std::fabs(rehi));
                    const double mim = std::max(std::fabs(imlo), std::fabs(imhi));
                    if (mre * mre + mim * mim > A * A) continue;
                }
            }
            if (opt.exclude_center_radius > 0) {
                const double nre = relo <= 0 && rehi >= 0 ? 0 : std::min(std::fabs(relo), std::fabs(rehi));
                const double nim = imlo <= 0 && imhi >= 0 ? 0 : std::min(std::fabs(imlo), std::fabs(imhi));
                if (nre * nre + nim * nim < opt.exclude_center_radius * opt.exclude_center_radius)
                    continue;
            }
            if (opt.annulus_r_hi > 0 && (rc < opt.annulus_r_lo || rc > opt.annulus_r_hi)) continue;
            long double acc = 0;
            for (int a = 0; a < S; ++a)
                for (int b = 0; b < S; ++b)
                    acc += density(relo + (a + 0.5) * (rehi - relo) / S,
                                   imlo + (b + 0.5) * (imhi - imlo) / S);
            const double area = (rehi - relo) * (imhi - imlo);
            const double integral = (double)(acc / (S * (long double)S)) * area;
            accumulate_compare(rep, h.mass[h.idx(i, j)], integral, area, rc, sum_d, sum_d2,
                               rings, ring_lo, ring_w);
        }
    }
    finish_compare(rep, sum_d, sum_d2, std::move(rings));
    return rep;
}

CompareReport compare(const Hist1D& h, const std::function<double(double)>& density,
                      const CompareOptions& opt) {
    if (opt.subsamples < 1) throw ValidationError("subsample count must be positive");
    CompareReport rep;
    std::vector<RingStat> rings = init_rings(opt);
    const double ring_lo = opt.profile_r_lo;
    const double ring_w =
        rings.empty() ? 0 : (opt.profile_r_hi - opt.profile_r_lo) / (double)rings.size();
    const int S = opt.subsamples;
    long double sum_d = 0, sum_d2 = 0;
    for (int i = 0; i < h.n; ++i) {
        const double lo = h.lo(i), hi = h.hi(i);
        const double rc = std::fabs(h.center(i));
        if (opt.annulus_r_hi > 0 && (rc < opt.annulus_r_lo || rc > opt.annulus_r_hi)) continue;
        if (opt.exclude_center_radius > 0) {
            const double nd = lo <= 0 && hi >= 0 ? 0 : std::min(std::fabs(lo), std::fabs(hi));
            if (nd < opt.exclude_center_radius) continue;
        }
        long double acc = 0;
        for (int a = 0; a < S; ++a) acc += density(lo + (a + 0.5) * (hi - lo) / S);
        const double width = hi - lo;
        const double integral = (double)(acc / S) * width;
        accumulate_compare(rep, h.mass[(size_t)i], integral, width, rc, sum_d, sum_d2,
                           rings, ring_lo, ring_w);
    }
    finish_compare(rep, sum_d, sum_d2, std::move(rings));
    return rep;
}

Hist2D theory_hist2d(const HistSpec& spec, double psi,
                     const std::function<double(double, double)>& density, int subsamples) {
    if (subsamples < 1) throw ValidationError("subsample count must be positive");
    if (spec.n_re < 1 || spec.n_im < 1) throw ValidationError("bin counts must be positive");
    if (!(spec.half > 0) || !std::isfinite(spec.half))
        throw ValidationError("histogram half-extent must be positive and finite");
    if (!(psi > 0) || !std::isfinite(psi))
        throw ValidationError("scaling value must be positive and finite");
    Hist2D h;
    h.geom = spec.geom;
    h.n_re = spec.n_re;
    h.n_im = spec.n_im;
    h.diagonal_included = spec.diagonal;
    if (spec.geom == HistGeom::strip) {
        if (spec.n_im % 2 != 0)
            throw ValidationError("strip histograms need an even im bin count");
        h.re_half = spec.half;
        h.im_half = kPi * psi;
    } else {
        // Model windows live on the limit plane, so no cylinder size check.
        h.re_half = h.im_half = spec.half;
    }
    h.raw.assign((size_t)spec.n_re * spec.n_im, 0);
    h.mass.resize(h.raw.size());
    const int S = subsamples;
    for (int i = 0; i < h.n_re; ++i) {
        for (int j = 0; j < h.n_im; ++j) {
            const double relo = h.re_lo(i), rehi = h.re_hi(i);
            const double imlo = h.im_lo(j), imhi = h.im_hi(j);
            long double acc = 0;
            for (int a = 0; a < S; ++a)
                for (int b = 0; b < S; ++b)
                    acc += density(relo + (a + 0.5) * (rehi - relo) / S,
                                   imlo + (b + 0.5) * (imhi - imlo) / S);
            const double area = (rehi - relo) * (imhi - imlo);
            h.mass[h.idx(i, j)] = (double)(acc / (S * (long double)S)) * area;
        }
    }
    return h;
}

Hist1D theory_hist1d(double half, int n, const std::function<double(double)>& density,
                     int subsamples) {
    if (subsamples < 1) throw ValidationError("subsample count must be positive");
    if (n < 1) throw ValidationError("bin counts must be positive");
    if (!(half > 0) || !std::isfinite(half))
        throw ValidationError("histogram half-extent must be positive and finite");
    Hist1D h;
    h.half = half;
    h.n = n;
    h.raw.assign((size_t)n, 0);
    h.mass.resize((size_t)n);
    const int S = subsamples;
    for (int i = 0; i < n; ++i) {
        const double lo = h.lo(i), hi = h.hi(i);
        long double acc = 0;
        for (int a = 0; a < S; ++a) acc += density(lo + (a + 0.5) * (hi - lo) / S);
        h.mass[(size_t)i] = (double)(acc / S) * (hi - lo);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Pushforward by 2 Re

namespace {

// Weight totals per exact integral norm, plus the per-norm squared sums
// needed to separate diagonal pairs.
struct NormGroups {
    std::vector<long long> norm;
    std::vector<long long> wsum;
    std::vector<int128> w2sum;
};

NormGroups group_by_norm(const WeightedLogSet& set) {
    std::map<long long, std::pair<long long, int128>> acc;
    for (const LogEntry& e : set.entries) {
        const Rat n2 = set.grid.norm2_at(e.p);
        if (!n2.is_integer())
            throw ValidationError("pushforward by 2 Re needs integral norms");
        auto& slot = acc[n2.num()];
        slot.first += e.w;
        slot.second += (int128)e.w * e.w;
    }
    NormGroups g;
    g.norm.reserve(acc.size());
    for (const auto& [n, s] : acc) {
        g.norm.push_back(n);
        g.wsum.push_back(s.first);
        g.w2sum.push_back(s.second);
    }
    return g;
}

} // namespace

std::map<Rat, int128> pushforward_2re_atoms(const WeightedLogSet& set, bool diagonal) {
    const NormGroups g = group_by_norm(set);
    std::map<Rat, int128> out;
    const size_t D = g.norm.size();
    for (size_t a = 0; a < D; ++a) {
        const int128 same = (int128)g.wsum[a] * g.wsum[a] - g.w2sum[a] +
                            (diagonal ? g.w2sum[a] : (int128)0);
        if (same != 0) out[Rat(1)] += same;
        for (size_t b = a + 1; b < D; ++b) {
            const int128 m = (int128)g.wsum[a] * g.wsum[b];
            if (m == 0) continue;
            out[Rat(g.norm[b], g.norm[a])] += m;
            out[Rat(g.norm[a], g.norm[b])] += m;
        }
    }
    return out;
}

Hist1D pushforward_2re_hist(const WeightedLogSet& set, bool diagonal, double half, int bins,
                            const RenormSpec& renorm) {
    if (bins < 1) throw ValidationError("bin counts must be positive");
    if (!(half > 0) || !std::isfinite(half))
        throw ValidationError("histogram half-extent must be positive and finite");
    if (set.sum_w > (int128)3000000000LL)
        throw OverflowError("total weight too large for 64-bit pair masses");
    const NormGroups g = group_by_norm(set);
    Hist1D h;
    h.half = half;
    h.n = bins;
    h.diagonal_included = diagonal;
    h.total_raw_mass = set.total_raw_mass(diagonal);
    h.raw.assign((size_t)bins, 0);
    const size_t D = g.norm.size();
    for (size_t a = 0; a < D; ++a) {
        const long long same =
            checked_w((int128)g.wsum[a] * g.wsum[a] - g.w2sum[a] +
                          (diagonal ? g.w2sum[a] : (int128)0),
                      "pair mass");
        if (same != 0) {
            const int i0 = fold_bin(0.0, half, bins);
            if (i0 >= 0) h.raw[(size_t)i0] += same;
        }
        for (size_t b = a + 1; b < D; ++b) {
            const long long m = checked_w((int128)g.wsum[a] * g.wsum[b], "pair mass");
            if (m == 0) continue;
            const double t = std::log((double)g.norm[b] / (double)g.norm[a]);
            const int ip = fold_bin(t, half, bins);
            if (ip >= 0) h.raw[(size_t)ip] += m;
            const int in = fold_bin(-t, half, bins);
            if (in >= 0) h.raw[(size_t)in] += m;
        }
    }
    h.renorm_divisor = renorm.divisor(set.N, 1.0, (long double)h.total_raw_mass);
    h.mass.resize(h.raw.size());
    for (size_t i = 0; i < h.raw.size(); ++i) h.mass[i] = (double)h.raw[i] / h.renorm_divisor;
    return h;
}

} // namespace latcorr
