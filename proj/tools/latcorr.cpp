// latcorr: lattice logarithm pair correlation toolkit.
//
// Subcommands cover the empirical/theory/compare pipeline plus the arithmetic
// cross-checks (mertens, mirsky, ideal-count, prop65), the ortholength
// spectrum, and constant evaluation.  All flags can also be given through a
// key=value file via --config.  Exit codes: 0 success, 1 invalid request,
// 2 well-formed request that cannot be satisfied.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "latcorr/arithmetic_sums.hpp"
#include "latcorr/errors.hpp"
#include "latcorr/io.hpp"
#include "latcorr/ortholength.hpp"
#include "latcorr/pair_correlation.hpp"

namespace {

using namespace latcorr;
using nlohmann::json;
using io::Meta;

constexpr double kTwoPi = 2 * 3.14159265358979323846;

// --- small parsers (composite flag values are single comma-joined tokens) ---

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ',') {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

long long parse_ll(const std::string& s) {
    try {
        size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("not an integer: " + s);
    }
}

Rat parse_rat(const std::string& s) {
    const size_t sl = s.find('/');
    if (sl == std::string::npos) return Rat(parse_ll(s));
    return Rat(parse_ll(s.substr(0, sl)), parse_ll(s.substr(sl + 1)));
}

std::pair<long long, long long> parse_ll_pair(const std::string& s, const char* what) {
    const auto parts = split_commas(s);
    if (parts.size() != 2)
        throw ValidationError(std::string(what) + " needs two comma-separated integers: " + s);
    return {parse_ll(parts[0]), parse_ll(parts[1])};
}

// --- source lattice selection ------------------------------------------------

struct SourceOpts {
    std::string grid_name;  // gauss | eisenstein
    std::string basis;      // "v1x,v1y,v2x,v2y" as rationals
    long long yscale = 1;
    std::string offset;     // "ox,oy" as rationals
    long long field_D = 0;  // nonzero selects a field source
    std::string gen = "1,0";
    bool field_given = false;
};

void add_source_options(CLI::App* cmd, SourceOpts& s) {
    cmd->add_option("--grid", s.grid_name, "Built-in grid: gauss or eisenstein")
        ->check(CLI::IsMember({"gauss", "eisenstein"}));
    cmd->add_option("--basis", s.basis,
                    "Explicit basis v1x,v1y,v2x,v2y (rationals; y in units of sqrt(yscale))");
    cmd->add_option("--yscale", s.yscale, "Quadratic scale s of the y axis (plane y = y*sqrt(s))");
    cmd->add_option("--offset", s.offset, "Grid translation ox,oy (rationals)");
    cmd->add_option("--field", s.field_D, "Field discriminant (e.g. -4 for Q(i))")
        ->each([&s](const std::string&) { s.field_given = true; });
    cmd->add_option("--gen", s.gen, "Ideal generator x,y over (1, omega)");
}

const Field& source_field(const SourceOpts& s) {
    if (!s.field_given) throw ValidationError("this operation needs --field");
    return Field::by_discriminant(s.field_D);
}

AlgInt source_gen(const SourceOpts& s) {
    const Field& K = source_field(s);
    const auto [x, y] = parse_ll_pair(s.gen, "--gen");
    return K.element(x, y);
}

Vec2Q parse_offset(const std::string& off) {
    const auto parts = split_commas(off);
    if (parts.size() != 2)
        throw ValidationError("--offset needs two comma-separated rationals: " + off);
    return {parse_rat(parts[0]), parse_rat(parts[1])};
}

Grid resolve_grid(const SourceOpts& s) {
    if (s.field_given) {
        const Field& K = source_field(s);
        Grid g = K.grid(source_gen(s));
        if (!s.offset.empty())
            g = Grid::make(g.v1(), g.v2(), parse_offset(s.offset), g.yscale());
        return g;
    }
    Vec2Q off = s.offset.empty() ? Vec2Q{} : parse_offset(s.offset);
    if (!s.basis.empty()) {
        const auto parts = split_commas(s.basis);
        if (parts.size() != 4)
            throw ValidationError("--basis needs four comma-separated rationals: " + s.basis);
        return Grid::make({parse_rat(parts[0]), parse_rat(parts[1])},
                          {parse_rat(parts[2]), parse_rat(parts[3])}, off, s.yscale);
    }
    if (s.grid_name == "gauss")
        return Grid::make({Rat(1), Rat(0)}, {Rat(0), Rat(1)}, off, 1);
    if (s.grid_name == "eisenstein")
        return Grid::make({Rat(1), Rat(0)}, {Rat(1, 2), Rat(1, 2)}, off, 3);
    throw ValidationError("no source lattice given (use --grid, --basis, or --field)");
}

void echo_source(Meta& meta, const SourceOpts& s) {
    if (s.field_given) {
        meta.emplace_back("field", std::to_string(s.field_D));
        meta.emplace_back("gen", s.gen);
    } else if (!s.basis.empty()) {
        meta.emplace_back("basis", s.basis);
        meta.emplace_back("yscale", std::to_string(s.yscale));
    } else if (!s.grid_name.empty()) {
        meta.emplace_back("grid", s.grid_name);
    }
    if (!s.offset.empty()) meta.emplace_back("offset", s.offset);
}

// --- shared run pieces -------------------------------------------------------

ScalingSpec parse_scaling(const std::string& s) {
    if (s == "one" || s == "1") return ScalingSpec::constant_one();
    if (s == "nlog") return ScalingSpec::n_over_log();
    if (s.rfind("power:", 0) == 0) {
        try {
            return ScalingSpec::power(std::stod(s.substr(6)));
        } catch (const std::exception&) {
            throw ValidationError("bad scaling exponent in: " + s);
        }
    }
    throw ValidationError("unknown scaling (use one, power:<alpha>, or nlog): " + s);
}

RenormSpec parse_renorm(const std::string& s) {
    if (s == "probability") return RenormSpec::probability();
    if (s == "psi") return RenormSpec::by_psi();
    if (s == "n4psi2") return RenormSpec::by_n4_over_psi2();
    if (s == "psi2") return RenormSpec::by_psi2();
    if (s == "n6") return RenormSpec::by_n6();
    if (s.rfind("value:", 0) == 0) {
        try {
            return RenormSpec::explicit_value(std::stod(s.substr(6)));
        } catch (const std::exception&) {
            throw ValidationError("bad renormalizer value in: " + s);
        }
    }
    throw ValidationError(
        "unknown renormalizer (probability, psi, n4psi2, psi2, n6, value:<v>): " + s);
}

struct GeomOpts {
    double window = 0, strip = 0;
    int bins = 0, bins_re = 0, bins_im = 0;
};

void add_geom_options(CLI::App* cmd, GeomOpts& g) {
    cmd->add_option("--window", g.window, "Window size A: keep atoms in the closed disk |z| <= A, bin over the square [-A,A]^2");
    cmd->add_option("--strip", g.strip, "Strip re half-width X (im spans the full cylinder)");
    cmd->add_option("--bins", g.bins, "Bin count for both axes");
    cmd->add_option("--bins-re", g.bins_re, "Bin count for the re axis");
    cmd->add_option("--bins-im", g.bins_im, "Bin count for the im axis");
}

HistSpec resolve_hist_spec(const GeomOpts& g, bool diagonal) {
    if ((g.window > 0) == (g.strip > 0))
        throw ValidationError("give exactly one of --window or --strip");
    HistSpec spec;
    spec.geom = g.window > 0 ? HistGeom::window : HistGeom::strip;
    spec.half = g.window > 0 ? g.window : g.strip;
    spec.n_re = g.bins_re > 0 ? g.bins_re : g.bins;
    spec.n_im = g.bins_im > 0 ? g.bins_im : g.bins;
    if (spec.n_re <= 0 || spec.n_im <= 0)
        throw ValidationError("bin counts required (--bins or --bins-re/--bins-im)");
    spec.diagonal = diagonal;
    return spec;
}

void echo_geom(Meta& meta, const GeomOpts& g) {
    if (g.window > 0) meta.emplace_back("window", io::fmt_g(g.window, 12));
    if (g.strip > 0) meta.emplace_back("strip", io::fmt_g(g.strip, 12));
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file: " + path);
    f << content;
    if (!f) throw RuntimeError("failed writing output file: " + path);
}

json meta_to_json(const Meta& meta) {
    json j = json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

void emit_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

// --- empirical ---------------------------------------------------------------

struct EmpiricalOpts {
    SourceOpts src;
    GeomOpts geom;
    long long N = 0;
    std::string scaling = "one";
    std::string weight = "unit";
    std::string renorm = "probability";
    std::string algorithm = "auto";
    bool diagonal = false;
    int workers = 1;
    bool force = false;
    std::string out, json_out;
};

void run_empirical(const EmpiricalOpts& o) {
    const ScalingSpec scaling = parse_scaling(o.scaling);
    const RenormSpec renorm = parse_renorm(o.renorm);
    const HistSpec spec = resolve_hist_spec(o.geom, o.diagonal);
    if (renorm.kind == RenormSpec::Kind::probability && scaling.regime() != Regime::unscaled &&
        !o.force)
        throw ValidationError(
            "probability renormalization with a scaled run loses the limit normalization; "
            "pass --force to run anyway");
    WeightKind kind;
    if (o.weight == "unit")
        kind = WeightKind::unit;
    else if (o.weight == "euler")
        kind = WeightKind::euler_phi;
    else
        throw ValidationError("unknown weight kind (unit or euler): " + o.weight);

    WeightedLogSet set;
    if (o.src.field_given && kind == WeightKind::euler_phi && o.src.offset.empty())
        set = build_logset(source_field(o.src), source_gen(o.src), o.N, kind);
    else
        set = build_logset(resolve_grid(o.src), o.N, kind);

    std::string algorithm = o.algorithm;
    if (algorithm == "auto")
        algorithm =
            (spec.geom == HistGeom::window && scaling.regime() != Regime::unscaled) ? "windowed"
                                                                                    : "naive";
    Hist2D h;
    if (algorithm == "naive")
        h = empirical_naive(set, scaling, renorm, spec, o.workers);
    else if (algorithm == "windowed")
        h = empirical_windowed(set, scaling, renorm, spec, o.workers);
    else
        throw ValidationError("unknown algorithm (auto, naive, windowed): " + o.algorithm);

    Meta meta{{"command", "empirical"}};
    echo_source(meta, o.src);
    meta.emplace_back("N", std::to_string(o.N));
    meta.emplace_back("scaling", o.scaling);
    echo_geom(meta, o.geom);
    meta.emplace_back("weight", o.weight);
    meta.emplace_back("renorm", o.renorm);
    meta.emplace_back("algorithm", algorithm);

    std::ostringstream csv;
    io::write_hist2d_csv(csv, h, meta);
    write_text(o.out, csv.str());

    if (!o.json_out.empty()) {
        json j;
        j["config"] = meta_to_json(meta);
        j["psi"] = scaling.psi(o.N);
        j["points"] = set.entries.size();
        j["total_raw_mass"] = io::int128_str(h.total_raw_mass);
        j["renormalizer"] = h.renorm_divisor;
        emit_json(o.json_out, j);
    }
}

// --- theory ------------------------------------------------------------------

struct TheoryOpts {
    SourceOpts src;
    GeomOpts geom;
    std::string density;
    double lambda = 1;
    double psi = 1;
    double half = 0;  // 1D extent for r2d / ortho
    long long prime_bound = 100000;
    int subsamples = 4;
    std::string out, json_out;
};

void run_theory(const TheoryOpts& o) {
    Meta meta{{"command", "theory"}, {"density", o.density}};
    std::ostringstream csv;
    json extra;
    if (o.density == "r2d" || o.density == "ortho") {
        if (!(o.half > 0) || o.geom.bins <= 0)
            throw ValidationError("1D densities need --half and --bins");
        const RealMode mode = o.density == "r2d" ? RealMode::r2d : RealMode::ortho;
        Hist1D h = theory_hist1d(
            o.half, o.geom.bins, [&](double t) { return density_real(t, mode); }, o.subsamples);
        meta.emplace_back("half", io::fmt_g(o.half, 12));
        io::write_hist1d_csv(csv, h, meta);
    } else {
        std::function<double(double, double)> f;
        if (o.density == "unscaled-unit") {
            f = [](double re, double) { return density_unscaled(re, UnscaledMode::unit); };
        } else if (o.density == "unscaled-euler") {
            f = [](double re, double) { return density_unscaled(re, UnscaledMode::euler); };
        } else if (o.density == "poissonian") {
            const double c = density_poissonian(resolve_grid(o.src));
            extra["density_constant"] = c;
            f = [c](double, double) { return c; };
        } else if (o.density == "theta-infty") {
            const Grid g = resolve_grid(o.src);
            const double lambda = o.lambda;
            meta.emplace_back("lambda", io::fmt_g(lambda, 12));
            f = [g, lambda](double x, double y) { return density_theta_infty(g, lambda, x, y); };
        } else if (o.density == "weighted-linear") {
            const Field& K = source_field(o.src);
            const AlgInt gen = source_gen(o.src);
            const double rmax =
                o.geom.window > 0 ? o.geom.window * 1.4142135623730951 + 1
                                  : std::hypot(o.geom.strip, kTwoPi / 2 * o.psi) + 1;
            auto wd = std::make_shared<WeightedLinearDensity>(K, gen, rmax, o.prime_bound);
            meta.emplace_back("prime_bound", std::to_string(o.prime_bound));
            f = [wd](double x, double y) { return (*wd)(x, y); };
        } else {
            throw ValidationError(
                "unknown density (unscaled-unit, unscaled-euler, poissonian, theta-infty, "
                "weighted-linear, r2d, ortho): " +
                o.density);
        }
        echo_source(meta, o.src);
        const HistSpec spec = resolve_hist_spec(o.geom, false);
        echo_geom(meta, o.geom);
        Hist2D h = theory_hist2d(spec, o.psi, f, o.subsamples);
        io::write_hist2d_csv(csv, h, meta);
    }
    write_text(o.out, csv.str());
    if (!o.json_out.empty()) {
        json j;
        j["config"] = meta_to_json(meta);
        if (!extra.empty()) j.update(extra);
        emit_json(o.json_out, j);
    }
}

// --- compare -----------------------------------------------------------------

struct CompareOpts {
    std::string a, b, json_out;
};

std::string first_data_line(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        size_t i = line.find_first_not_of(" \t\r");
        if (i == std::string::npos) continue;
        if (line[i] == '#') continue;
        return line.substr(i, line.find_last_not_of(" \t\r") - i + 1);
    }
    return "";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void run_compare(const CompareOpts& o) {
    const std::string ta = slurp(o.a), tb = slurp(o.b);
    const std::string ha = first_data_line(ta), hb = first_data_line(tb);
    if (ha != hb) throw ValidationError("input files have different layouts");
    io::FileCompare fc;
    if (ha == "re_lo,re_hi,im_lo,im_hi,mass,density_midpoint") {
        std::istringstream sa(ta), sb(tb);
        fc = io::compare_hists(io::read_hist2d_csv(sa), io::read_hist2d_csv(sb));
    } else if (ha == "t,mass") {
        std::istringstream sa(ta), sb(tb);
        fc = io::compare_hists(io::read_hist1d_csv(sa), io::read_hist1d_csv(sb));
    } else {
        throw ValidationError("unrecognized CSV layout: " + ha);
    }
    json j;
    j["a"] = o.a;
    j["b"] = o.b;
    j["l1"] = fc.l1;
    j["sup_density_dev"] = fc.sup_density_dev;
    j["bins"] = fc.bins;
    emit_json(o.json_out, j);
}

// --- constants / arithmetic sums ----------------------------------------------

struct ConstantsOpts {
    long long field_D = -4;
    long long prime_bound = 1000000;
    double tol = 1e-12;
    std::string m, k;
    std::string json_out;
};

void run_constants(const ConstantsOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    json j;
    j["field"] = o.field_D;
    j["unit_count"] = K.unit_count();
    j["covolume"] = K.grid(K.element(1, 0)).covol();
    j["zeta_K_2"] = zeta_K_2(K, o.tol);
    j["zeta_K_2_tol"] = o.tol;
    const EulerProduct lim = limit_constant(K, o.prime_bound);
    j["limit_constant"] = {{"value", lim.value}, {"log_tail_bound", lim.log_tail_bound}};
    j["prime_bound"] = o.prime_bound;
    if (!o.m.empty()) {
        const auto [mx, my] = parse_ll_pair(o.m, "--m");
        const AlgInt m = K.element(mx, my);
        j["mertens_c_m"] = mertens_constant_c_m(m);
        if (!o.k.empty()) {
            const auto [kx, ky] = parse_ll_pair(o.k, "--k");
            const EulerProduct c = mirsky_constant_c_mk(m, K.element(kx, ky), o.prime_bound);
            j["mirsky_c_mk"] = {{"value", c.value}, {"log_tail_bound", c.log_tail_bound}};
        }
    }
    emit_json(o.json_out, j);
}

struct SumOpts {
    long long field_D = -4;
    std::string m = "1,0", k = "1,0";
    double zx = 1, zy = 0;
    double theta = kTwoPi;
    double x = 0;
    double y = 0;
    long long prime_bound = 100000;
    std::string json_out;
};

json report_json(const SumReport& r) {
    return {{"brute", (double)r.brute}, {"predicted", (double)r.predicted}, {"ratio", r.ratio}};
}

void run_mertens(const SumOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    const auto [mx, my] = parse_ll_pair(o.m, "--m");
    const Sector sec{o.zx, o.zy, o.theta, RadiusSq::from_radius(o.x)};
    const SumReport r = mertens_sum(K, K.element(mx, my), sec);
    json j = report_json(r);
    j["command"] = "mertens";
    emit_json(o.json_out, j);
}

void run_mirsky(const SumOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    const auto [mx, my] = parse_ll_pair(o.m, "--m");
    const auto [kx, ky] = parse_ll_pair(o.k, "--k");
    const Sector sec{o.zx, o.zy, o.theta, RadiusSq::from_radius(o.x)};
    const SumReport r = mirsky_sum(K, K.element(mx, my), K.element(kx, ky), sec, o.prime_bound);
    json j = report_json(r);
    j["command"] = "mirsky";
    emit_json(o.json_out, j);
}

void run_ideal_count(const SumOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    json j = report_json(ideal_count(K, o.y));
    j["command"] = "ideal-count";
    emit_json(o.json_out, j);
}

void run_prop65(const SumOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    json j = report_json(prop65_partial_sum(K, o.x, o.prime_bound));
    j["command"] = "prop65";
    emit_json(o.json_out, j);
}

// --- ortholength ---------------------------------------------------------------

struct OrthoOpts {
    long long field_D = -4;
    std::string b = "1,0";
    long long N = 0;
    double half = 3;
    int bins = 60;
    std::string renorm = "probability";
    bool verify = false;
    std::string spectrum_out, atoms_out, hist_out, json_out;
};

void run_ortho(const OrthoOpts& o) {
    const Field& K = Field::by_discriminant(o.field_D);
    const auto [bx, by] = parse_ll_pair(o.b, "--b");
    const AlgInt b = K.element(bx, by);
    const OrthoSpectrum spec = ortho_spectrum(K, b, o.N);
    Meta meta{{"command", "ortho"},
              {"field", std::to_string(o.field_D)},
              {"b", o.b},
              {"N", std::to_string(o.N)}};
    if (!o.spectrum_out.empty()) {
        std::ostringstream csv;
        io::write_spectrum_csv(csv, spec, meta);
        write_text(o.spectrum_out, csv.str());
    }
    if (!o.atoms_out.empty()) {
        const OrthoPairMeasure m = ortho_pair_measure(spec);
        std::ostringstream csv;
        io::write_atoms_csv(csv, m.numer, (int128)m.unit_count * m.unit_count, meta);
        write_text(o.atoms_out, csv.str());
    }
    if (!o.hist_out.empty()) {
        Hist1D h = ortho_pair_hist(spec, o.half, o.bins, parse_renorm(o.renorm));
        std::ostringstream csv;
        io::write_hist1d_csv(csv, h, meta);
        write_text(o.hist_out, csv.str());
    }
    json j;
    j["config"] = meta_to_json(meta);
    j["unit_count"] = spec.unit_count;
    j["length_classes"] = spec.norm.size();
    j["multiplicity_numerator_total"] = io::int128_str(spec.numer_total());
    if (o.verify) {
        const Prop71Report rep = verify_prop71(K, b, o.N);
        j["pushforward_identity"] = {{"equal", rep.equal},
                                     {"atoms_left", rep.atoms_left},
                                     {"atoms_right", rep.atoms_right},
                                     {"mismatched", rep.mismatched}};
    }
    if (!o.json_out.empty() || o.verify || o.spectrum_out.empty())
        emit_json(o.json_out, j);
}

// --- r2d -----------------------------------------------------------------------

struct R2dOpts {
    long long d = 1;
    long long N = 0;
    double half = 3;
    int bins = 60;
    std::string atoms_out, hist_out, json_out;
};

void run_r2d(const R2dOpts& o) {
    const auto atoms = r2d_pair_measure(o.d, o.N);
    Meta meta{{"command", "r2d"}, {"d", std::to_string(o.d)}, {"N", std::to_string(o.N)}};
    if (!o.atoms_out.empty()) {
        std::ostringstream csv;
        io::write_atoms_csv(csv, atoms, 1, meta);
        write_text(o.atoms_out, csv.str());
    }
    if (!o.hist_out.empty()) {
        if (o.bins < 1 || !(o.half > 0))
            throw ValidationError("histogram output needs positive --half and --bins");
        Hist1D h;
        h.half = o.half;
        h.n = o.bins;
        h.diagonal_included = true;
        h.raw.assign((size_t)o.bins, 0);
        int128 total = 0;
        for (const auto& [key, mass] : atoms) {
            total += mass;
            if (key < Rat(1)) continue;  // mirrored below from the >= 1 side
            const double t = std::log(key.to_double());
            const int i = fold_bin(t, o.half, o.bins);
            if (i >= 0) h.raw[(size_t)i] += (long long)mass;
            if (key != Rat(1)) {
                const int ir = fold_bin(-t, o.half, o.bins);
                if (ir >= 0) h.raw[(size_t)ir] += (long long)atoms.at(Rat(key.den(), key.num()));
            }
        }
        h.total_raw_mass = total;
        h.renorm_divisor = (double)(long double)total;
        h.mass.resize(h.raw.size());
        for (size_t i = 0; i < h.raw.size(); ++i)
            h.mass[i] = (double)h.raw[i] / h.renorm_divisor;
        std::ostringstream csv;
        io::write_hist1d_csv(csv, h, meta);
        write_text(o.hist_out, csv.str());
    }
    json j;
    j["config"] = meta_to_json(meta);
    j["atom_count"] = atoms.size();
    int128 total = 0;
    for (const auto& [key, mass] : atoms) total += mass;
    j["total_mass"] = io::int128_str(total);
    if (!o.json_out.empty() || (o.atoms_out.empty() && o.hist_out.empty()))
        emit_json(o.json_out, j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice logarithm pair correlation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Read options from a key=value file ([subcommand] sections hold subcommand flags)");

    EmpiricalOpts eo;
    CLI::App* emp = app.add_subcommand("empirical", "Binned empirical pair correlation measure");
    add_source_options(emp, eo.src);
    add_geom_options(emp, eo.geom);
    emp->add_option("--N", eo.N, "Source point modulus bound")->required();
    emp->add_option("--scaling", eo.scaling, "Scaling: one, power:<alpha>, nlog");
    emp->add_option("--weight", eo.weight, "Weights: unit or euler");
    emp->add_option("--renorm", eo.renorm,
                    "Renormalizer: probability, psi, n4psi2, psi2, n6, value:<v>");
    emp->add_flag("--diagonal", eo.diagonal, "Include diagonal pairs");
    emp->add_option("--algorithm", eo.algorithm, "auto, naive, or windowed");
    emp->add_option("--workers", eo.workers, "Worker threads (default 1)");
    emp->add_flag("--force", eo.force, "Allow unusual flag combinations");
    emp->add_option("--out", eo.out, "CSV output path (default stdout)");
    emp->add_option("--json", eo.json_out, "JSON summary path");

    TheoryOpts to;
    CLI::App* thy = app.add_subcommand("theory", "Model density histograms");
    add_source_options(thy, to.src);
    add_geom_options(thy, to.geom);
    thy->add_option("--density", to.density,
                    "unscaled-unit, unscaled-euler, poissonian, theta-infty, weighted-linear, "
                    "r2d, ortho")
        ->required();
    thy->add_option("--lambda", to.lambda, "Linear scaling slope for theta-infty");
    thy->add_option("--psi", to.psi, "Strip height multiplier (im half = pi * psi)");
    thy->add_option("--half", to.half, "Half-extent for 1D densities");
    thy->add_option("--prime-bound", to.prime_bound, "Euler product truncation");
    thy->add_option("--subsamples", to.subsamples, "Per-axis quadrature points per bin");
    thy->add_option("--out", to.out, "CSV output path (default stdout)");
    thy->add_option("--json", to.json_out, "JSON summary path");

    CompareOpts co;
    CLI::App* cmp = app.add_subcommand("compare", "Compare two histogram CSV files");
    cmp->add_option("--a", co.a, "First CSV file")->required();
    cmp->add_option("--b", co.b, "Second CSV file")->required();
    cmp->add_option("--json", co.json_out, "JSON output path (default stdout)");

    ConstantsOpts ko;
    CLI::App* cst = app.add_subcommand("constants", "Field constants with tail bounds");
    cst->add_option("--field", ko.field_D, "Field discriminant")->required();
    cst->add_option("--prime-bound", ko.prime_bound, "Euler product truncation");
    cst->add_option("--tol", ko.tol, "Dedekind zeta tail tolerance");
    cst->add_option("--m", ko.m, "Modulus x,y for the totient-sum constant");
    cst->add_option("--k", ko.k, "Shift x,y for the correlation constant");
    cst->add_option("--json", ko.json_out, "JSON output path (default stdout)");

    SumOpts so;
    CLI::App* mer = app.add_subcommand("mertens", "Sectorial totient sum against its prediction");
    mer->add_option("--field", so.field_D, "Field discriminant")->required();
    mer->add_option("--m", so.m, "Modulus x,y");
    mer->add_option("--zx", so.zx, "Sector direction x");
    mer->add_option("--zy", so.zy, "Sector direction y");
    mer->add_option("--theta", so.theta, "Sector angle");
    mer->add_option("--x", so.x, "Radius cutoff")->required();
    mer->add_option("--json", so.json_out, "JSON output path (default stdout)");

    SumOpts mo;
    CLI::App* mir =
        app.add_subcommand("mirsky", "Sectorial shifted totient correlation against prediction");
    mir->add_option("--field", mo.field_D, "Field discriminant")->required();
    mir->add_option("--m", mo.m, "Modulus x,y");
    mir->add_option("--k", mo.k, "Shift x,y");
    mir->add_option("--zx", mo.zx, "Sector direction x");
    mir->add_option("--zy", mo.zy, "Sector direction y");
    mir->add_option("--theta", mo.theta, "Sector angle");
    mir->add_option("--x", mo.x, "Radius cutoff")->required();
    mir->add_option("--prime-bound", mo.prime_bound, "Euler product truncation");
    mir->add_option("--json", mo.json_out, "JSON output path (default stdout)");

    SumOpts io_;
    CLI::App* idc = app.add_subcommand("ideal-count", "Ideal counting against its prediction");
    idc->add_option("--field", io_.field_D, "Field discriminant")->required();
    idc->add_option("--y", io_.y, "Norm bound")->required();
    idc->add_option("--json", io_.json_out, "JSON output path (default stdout)");

    SumOpts po;
    CLI::App* p65 = app.add_subcommand("prop65", "Weighted ideal partial sum against prediction");
    p65->add_option("--field", po.field_D, "Field discriminant")->required();
    p65->add_option("--x", po.x, "Norm radius cutoff")->required();
    p65->add_option("--prime-bound", po.prime_bound, "Euler product truncation");
    p65->add_option("--json", po.json_out, "JSON output path (default stdout)");

    OrthoOpts oo;
    CLI::App* ort = app.add_subcommand("ortho", "Ortholength spectrum and pair correlations");
    ort->add_option("--field", oo.field_D, "Field discriminant")->required();
    ort->add_option("--b", oo.b, "Ideal generator x,y");
    ort->add_option("--N", oo.N, "Spectrum modulus bound")->required();
    ort->add_option("--half", oo.half, "Histogram half-extent");
    ort->add_option("--bins", oo.bins, "Histogram bin count");
    ort->add_option("--renorm", oo.renorm, "Histogram renormalizer");
    ort->add_flag("--verify", oo.verify, "Check the pushforward identity");
    ort->add_option("--spectrum-out", oo.spectrum_out, "Spectrum CSV path");
    ort->add_option("--atoms-out", oo.atoms_out, "Exact atom CSV path");
    ort->add_option("--hist-out", oo.hist_out, "Binned histogram CSV path");
    ort->add_option("--json", oo.json_out, "JSON summary path (default stdout)");

    R2dOpts ro;
    CLI::App* r2d = app.add_subcommand("r2d", "Representation-count pair measure");
    r2d->add_option("--d", ro.d, "Positive integer d of the norm form");
    r2d->add_option("--N", ro.N, "Radius bound (norms up to N^2)")->required();
    r2d->add_option("--half", ro.half, "Histogram half-extent");
    r2d->add_option("--bins", ro.bins, "Histogram bin count");
    r2d->add_option("--atoms-out", ro.atoms_out, "Exact atom CSV path");
    r2d->add_option("--hist-out", ro.hist_out, "Binned histogram CSV path");
    r2d->add_option("--json", ro.json_out, "JSON summary path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const RuntimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (emp->parsed()) run_empirical(eo);
        if (thy->parsed()) run_theory(to);
        if (cmp->parsed()) run_compare(co);
        if (cst->parsed()) run_constants(ko);
        if (mer->parsed()) run_mertens(so);
        if (mir->parsed()) run_mirsky(mo);
        if (idc->parsed()) run_ideal_count(io_);
        if (p65->parsed()) run_prop65(po);
        if (ort->parsed()) run_ortho(oo);
        if (r2d->parsed()) run_r2d(ro);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const RuntimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
