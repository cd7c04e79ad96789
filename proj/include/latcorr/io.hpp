#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "latcorr/ortholength.hpp"
#include "latcorr/pair_correlation.hpp"

namespace latcorr {
namespace io {

using Meta = std::vector<std::pair<std::string, std::string>>;

// Locale-independent %.*g formatting; 12 significant digits for geometry,
// 17 for masses (exact double round trip).
std::string fmt_g(double v, int sig);
std::string int128_str(int128 v);

// Hist2D CSV: `# key=value` metadata followed by the header
// re_lo,re_hi,im_lo,im_hi,mass,density_midpoint and one row per bin in
// (re, im) index order.  density_midpoint is mass / bin area.
void write_hist2d_csv(std::ostream& os, const Hist2D& h, const Meta& extra = {});
Hist2D read_hist2d_csv(std::istream& is, std::map<std::string, std::string>* meta = nullptr);

// Binned 1D CSV: header t,mass with bin midpoints.
void write_hist1d_csv(std::ostream& os, const Hist1D& h, const Meta& extra = {});
Hist1D read_hist1d_csv(std::istream& is, std::map<std::string, std::string>* meta = nullptr);

// Exact atom CSV: header num,den,mass_num,mass_den; atom key num/den reduced,
// mass the exact rational mass_num/mass_den.
void write_atoms_csv(std::ostream& os, const std::map<Rat, int128>& atoms, int128 mass_den,
                     const Meta& extra = {});

// Ortholength spectrum CSV: norm,length,multiplicity_numerator,unit_count.
void write_spectrum_csv(std::ostream& os, const OrthoSpectrum& spec, const Meta& extra = {});

// Bin-by-bin comparison of two histograms with identical geometry.
struct FileCompare {
    double l1 = 0;
    double sup_density_dev = 0;
    long long bins = 0;
};
FileCompare compare_hists(const Hist2D& a, const Hist2D& b);
FileCompare compare_hists(const Hist1D& a, const Hist1D& b);

} // namespace io
} // namespace latcorr
