#include "latcorr/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <ostream>

#include "latcorr/errors.hpp"

namespace latcorr {
namespace io {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ValidationError("empty numeric field in CSV");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ValidationError("malformed number in CSV: " + t);
    return v;
}

long long parse_int(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ValidationError("empty integer field in CSV");
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) throw ValidationError("malformed integer in CSV: " + t);
    return v;
}

int128 parse_int128(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw ValidationError("empty integer field in CSV");
    size_t i = 0;
    bool neg = false;
    if (t[0] == '-' || t[0] == '+') {
        neg = t[0] == '-';
        i = 1;
    }
    if (i == t.size()) throw ValidationError("malformed integer in CSV: " + t);
    int128 v = 0;
    for (; i < t.size(); ++i) {
        if (t[i] < '0' || t[i] > '9') throw ValidationError("malformed integer in CSV: " + t);
        v = v * 10 + (t[i] - '0');
    }
    return neg ? -v : v;
}

// Reads `# key=value` comment lines into meta, returns the first
// non-comment, non-blank line (the header).
std::string read_meta(std::istream& is, std::map<std::string, std::string>& meta) {
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] != '#') return t;
        const std::string body = trim(t.substr(1));
        const size_t eq = body.find('=');
        if (eq != std::string::npos)
            meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    throw ValidationError("CSV input has no header row");
}

const std::string& require(const std::map<std::string, std::string>& meta,
                           const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ValidationError("CSV metadata is missing key: " + key);
    return it->second;
}

void write_meta(std::ostream& os, const Meta& pairs) {
    for (const auto& [k, v] : pairs) os << "# " << k << "=" << v << "\n";
}

void check_geometry(bool ok) {
    if (!ok) throw ValidationError("histogram geometries differ");
}

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)); }

constexpr const char* kHist2DHeader = "re_lo,re_hi,im_lo,im_hi,mass,density_midpoint";
constexpr const char* kHist1DHeader = "t,mass";

} // namespace

std::string fmt_g(double v, int sig) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", sig, v);
    return buf;
}

std::string int128_str(int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
    std::string s;
    while (u > 0) {
        s.push_back((char)('0' + (int)(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::string out(s.rbegin(), s.rend());
    return out;
}

void write_hist2d_csv(std::ostream& os, const Hist2D& h, const Meta& extra) {
    write_meta(os, extra);
    Meta own = {
        {"geom", h.geom == HistGeom::strip ? "strip" : "window"},
        {"re_half", fmt_g(h.re_half, 17)},
        {"im_half", fmt_g(h.im_half, 17)},
        {"n_re", std::to_string(h.n_re)},
        {"n_im", std::to_string(h.n_im)},
        {"diagonal", h.diagonal_included ? "1" : "0"},
        {"renorm_divisor", fmt_g(h.renorm_divisor, 17)},
        {"total_raw_mass", int128_str(h.total_raw_mass)},
    };
    write_meta(os, own);
    os << kHist2DHeader << "\n";
    const double area = h.bin_area();
    for (int i = 0; i < h.n_re; ++i) {
        for (int j = 0; j < h.n_im; ++j) {
            const double m = h.mass[h.idx(i, j)];
            os << fmt_g(h.re_lo(i), 12) << ',' << fmt_g(h.re_hi(i), 12) << ','
               << fmt_g(h.im_lo(j), 12) << ',' << fmt_g(h.im_hi(j), 12) << ','
               << fmt_g(m, 17) << ',' << fmt_g(m / area, 17) << "\n";
        }
    }
}

Hist2D read_hist2d_csv(std::istream& is, std::map<std::string, std::string>* meta_out) {
    std::map<std::string, std::string> meta;
    const std::string header = read_meta(is, meta);
    if (header != kHist2DHeader)
        throw ValidationError("unexpected CSV header: " + header);
    Hist2D h;
    const std::string geom = require(meta, "geom");
    if (geom == "strip")
        h.geom = HistGeom::strip;
    else if (geom == "window")
        h.geom = HistGeom::window;
    else
        throw ValidationError("unknown histogram geometry: " + geom);
    h.re_half = parse_double(require(meta, "re_half"));
    h.im_half = parse_double(require(meta, "im_half"));
    h.n_re = (int)parse_int(require(meta, "n_re"));
    h.n_im = (int)parse_int(require(meta, "n_im"));
    if (h.n_re < 1 || h.n_im < 1 || (size_t)h.n_re * h.n_im > 100000000u)
        throw ValidationError("CSV bin counts out of range");
    h.diagonal_included = parse_int(require(meta, "diagonal")) != 0;
    h.renorm_divisor = parse_double(require(meta, "renorm_divisor"));
    h.total_raw_mass = parse_int128(require(meta, "total_raw_mass"));
    h.mass.reserve((size_t)h.n_re * h.n_im);
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = split(t, ',');
        if (cols.size() != 6) throw ValidationError("CSV row does not have 6 columns: " + t);
        h.mass.push_back(parse_double(cols[4]));
    }
    if (h.mass.size() != (size_t)h.n_re * h.n_im)
        throw ValidationError("CSV row count does not match the declared bin counts");
    if (meta_out) *meta_out = std::move(meta);
    return h;
}

void write_hist1d_csv(std::ostream& os, const Hist1D& h, const Meta& extra) {
    write_meta(os, extra);
    Meta own = {
        {"half", fmt_g(h.half, 17)},
        {"n", std::to_string(h.n)},
        {"diagonal", h.diagonal_included ? "1" : "0"},
        {"renorm_divisor", fmt_g(h.renorm_divisor, 17)},
        {"total_raw_mass", int128_str(h.total_raw_mass)},
    };
    write_meta(os, own);
    os << kHist1DHeader << "\n";
    for (int i = 0; i < h.n; ++i)
        os << fmt_g(h.center(i), 12) << ',' << fmt_g(h.mass[(size_t)i], 17) << "\n";
}

Hist1D read_hist1d_csv(std::istream& is, std::map<std::string, std::string>* meta_out) {
    std::map<std::string, std::string> meta;
    const std::string header = read_meta(is, meta);
    if (header != kHist1DHeader)
        throw ValidationError("unexpected CSV header: " + header);
    Hist1D h;
    h.half = parse_double(require(meta, "half"));
    h.n = (int)parse_int(require(meta, "n"));
    if (h.n < 1 || h.n > 100000000)
        throw ValidationError("CSV bin counts out of range");
    h.diagonal_included = parse_int(require(meta, "diagonal")) != 0;
    h.renorm_divisor = parse_double(require(meta, "renorm_divisor"));
    h.total_raw_mass = parse_int128(require(meta, "total_raw_mass"));
    h.mass.reserve((size_t)h.n);
    std::string line;
    while (std::getline(is, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cols = split(t, ',');
        if (cols.size() != 2) throw ValidationError("CSV row does not have 2 columns: " + t);
        h.mass.push_back(parse_double(cols[1]));
    }
    if (h.mass.size() != (size_t)h.n)
        throw ValidationError("CSV row count does not match the declared bin count");
    if (meta_out) *meta_out = std::move(meta);
    return h;
}

void write_atoms_csv(std::ostream& os, const std::map<Rat, int128>& atoms, int128 mass_den,
                     const Meta& extra) {
    write_meta(os, extra);
    os << "num,den,mass_num,mass_den\n";
    for (const auto& [key, numer] : atoms)
        os << key.num() << ',' << key.den() << ',' << int128_str(numer) << ','
           << int128_str(mass_den) << "\n";
}

void write_spectrum_csv(std::ostream& os, const OrthoSpectrum& spec, const Meta& extra) {
    write_meta(os, extra);
    os << "norm,length,multiplicity_numerator,unit_count\n";
    for (size_t i = 0; i < spec.norm.size(); ++i)
        os << spec.norm[i] << ',' << fmt_g(spec.length[i], 17) << ',' << spec.numer[i] << ','
           << spec.unit_count << "\n";
}

FileCompare compare_hists(const Hist2D& a, const Hist2D& b) {
    check_geometry(a.geom == b.geom && a.n_re == b.n_re && a.n_im == b.n_im &&
                   near(a.re_half, b.re_half) && near(a.im_half, b.im_half));
    FileCompare out;
    const double area = a.bin_area();
    for (int i = 0; i < a.n_re; ++i) {
        for (int j = 0; j < a.n_im; ++j) {
            const double diff = a.mass[a.idx(i, j)] - b.mass[b.idx(i, j)];
            out.l1 += std::fabs(diff);
            out.sup_density_dev = std::max(out.sup_density_dev, std::fabs(diff) / area);
            ++out.bins;
        }
    }
    return out;
}

FileCompare compare_hists(const Hist1D& a, const Hist1D& b) {
    check_geometry(a.n == b.n && near(a.half, b.half));
    FileCompare out;
    const double width = a.bin_width();
    for (int i = 0; i < a.n; ++i) {
        const double diff = a.mass[(size_t)i] - b.mass[(size_t)i];
        out.l1 += std::fabs(diff);
        out.sup_density_dev = std::max(out.sup_density_dev, std::fabs(diff) / width);
        ++out.bins;
    }
    return out;
}

} // namespace io
} // namespace latcorr
