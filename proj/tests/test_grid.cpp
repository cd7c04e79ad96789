#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "latcorr/grid.hpp"

using namespace latcorr;

namespace {

constexpr double kPi = 3.14159265358979323846;

using PosKey = std::tuple<long long, long long, long long, long long>;

PosKey pos_key(const Vec2Q& v) {
    return {v.x.num(), v.x.den(), v.y.num(), v.y.den()};
}

std::set<PosKey> disk_pos_set(const Grid& g, double r, bool exclude_zero = false) {
    std::set<PosKey> out;
    for (GridPoint p : g.disk_points(RadiusSq::from_radius(r), exclude_zero))
        out.insert(pos_key(g.pos(p)));
    return out;
}

// Brute-force disk enumeration straight from an unreduced basis.
std::set<PosKey> disk_pos_brute(const Vec2Q& v1, const Vec2Q& v2, long long s, double r) {
    std::set<PosKey> out;
    Rat r2 = Rat::from_double(r) * Rat::from_double(r);
    for (long long m = -60; m <= 60; ++m)
        for (long long n = -60; n <= 60; ++n) {
            Vec2Q p = m * v1 + n * v2;
            if (norm2_q(p, s) <= r2) out.insert(pos_key(p));
        }
    return out;
}

Grid unit_grid() { return Grid::make({Rat(1), Rat(0)}, {Rat(0), Rat(1)}); }
Grid eisenstein_grid() {
    return Grid::make({Rat(1), Rat(0)}, {Rat(1, 2), Rat(1, 2)}, {}, 3);
}

} // namespace

TEST_CASE("unit square grid invariants") {
    Grid g = unit_grid();
    CHECK(g.covol2() == Rat(1));
    CHECK(g.covol() == 1.0);
    CHECK(g.systole2() == Rat(1));
    CHECK(g.diam2() == Rat(2));
    CHECK(g.is_lattice());
    CHECK(g.yscale() == 1);
}

TEST_CASE("hexagonal grid invariants") {
    Grid g = eisenstein_grid();
    CHECK(g.covol2() == Rat(3, 4)); // covol = sqrt(3)/2
    CHECK(g.covol() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
    CHECK(g.systole2() == Rat(1));
    CHECK(g.diam2() == Rat(3));
}

TEST_CASE("basis reduction finds the shortest vectors") {
    // 2Z + (3,1)Z is the even-coordinate-sum sublattice of Z^2.
    Grid g = Grid::make({Rat(2), Rat(0)}, {Rat(3), Rat(1)});
    CHECK(g.covol2() == Rat(4));
    CHECK(g.systole2() == Rat(2));
    CHECK(norm2_q(g.v1(), 1) == Rat(2));
    CHECK(norm2_q(g.v2(), 1) == Rat(2));
    CHECK(g.diam2() == Rat(4));
    CHECK(disk_pos_set(g, 10) ==
          disk_pos_brute({Rat(2), Rat(0)}, {Rat(3), Rat(1)}, 1, 10));
}

TEST_CASE("reduction is idempotent and preserves the point set") {
    std::array<std::array<long long, 4>, 5> bases = {{
        {{5, 2, 3, 4}}, {{7, 0, 1, 1}}, {{2, 1, -3, 5}}, {{1, 0, 0, 1}}, {{4, 6, 2, 2}},
    }};
    for (const auto& b : bases) {
        Vec2Q v1{Rat(b[0]), Rat(b[1])}, v2{Rat(b[2]), Rat(b[3])};
        Grid g = Grid::make(v1, v2);
        Grid again = Grid::make(g.v1(), g.v2(), g.offset(), g.yscale());
        CHECK(g == again);
        CHECK(g.systole2() <= norm2_q(g.v2(), 1));
        CHECK(disk_pos_set(g, 8) == disk_pos_brute(v1, v2, 1, 8));
    }
}

TEST_CASE("disk point counts on the unit square grid") {
    Grid g = unit_grid();
    CHECK(g.disk_points(RadiusSq::from_radius(1)).size() == 5);
    CHECK(g.disk_points(RadiusSq::from_radius(1), true).size() == 4);
    CHECK(g.disk_points(RadiusSq::from_radius(2)).size() == 13);
    // closed boundary: norm2 == 2 points are inside radius sqrt(2)
    CHECK(g.disk_points(RadiusSq::from_r2(Rat(2))).size() == 9);
    auto pts = g.disk_points(RadiusSq::from_radius(2));
    CHECK(std::is_sorted(pts.begin(), pts.end(), [](GridPoint a, GridPoint b) {
        return a.m != b.m ? a.m < b.m : a.n < b.n;
    }));
}

TEST_CASE("translated grids keep exact membership") {
    Grid g = Grid::make({Rat(2), Rat(0)}, {Rat(0), Rat(2)}, {Rat(1), Rat(1)});
    CHECK(!g.is_lattice());
    // offset is reduced into the fundamental parallelogram, ti in [-1/2, 1/2)
    CHECK(g.offset() == Vec2Q{Rat(-1), Rat(-1)});
    std::set<PosKey> got = disk_pos_set(g, 1.5);
    std::set<PosKey> want;
    for (long long x : {-1, 1})
        for (long long y : {-1, 1}) want.insert(pos_key({Rat(x), Rat(y)}));
    CHECK(got == want);
}

TEST_CASE("grid scaling covariance") {
    Grid g1 = unit_grid();
    Grid g3 = Grid::make({Rat(3), Rat(0)}, {Rat(0), Rat(3)});
    auto small = g1.disk_points(RadiusSq::from_radius(3));
    std::set<PosKey> scaled;
    for (GridPoint p : small) {
        Vec2Q v = g1.pos(p);
        scaled.insert(pos_key({Rat(3) * v.x, Rat(3) * v.y}));
    }
    CHECK(disk_pos_set(g3, 9) == scaled);
    CHECK(g3.covol2() == Rat(81) * g1.covol2());
    CHECK(g3.systole2() == Rat(9) * g1.systole2());
}

TEST_CASE("counting matches the area term up to the perimeter bound") {
    for (const Grid& g : {unit_grid(), eisenstein_grid()}) {
        for (double x : {10.0, 50.0, 200.0}) {
            double count = (double)g.disk_points(RadiusSq::from_radius(x)).size();
            double area = kPi * x * x / g.covol();
            double slack = 2 * g.diam() / g.covol() * x + 4;
            CHECK(std::fabs(count - area) <= slack);
        }
    }
}

TEST_CASE("sector with full aperture is the punctured disk") {
    Grid g = unit_grid();
    Sector full;
    full.r2 = RadiusSq::from_radius(2);
    auto sec = sector_points(g, full);
    CHECK(sec.size() == 12);
    std::set<PosKey> got;
    for (GridPoint p : sec) got.insert(pos_key(g.pos(p)));
    CHECK(got == disk_pos_set(g, 2, true));
}

TEST_CASE("quarter sectors pick the expected boundary points") {
    Grid g = unit_grid();
    // angle in (-pi/4, pi/4] about direction 1: keeps 1 and 1+i, drops 1-i
    Sector east{1, 0, kPi / 2, RadiusSq::from_radius(1.5)};
    std::set<PosKey> got;
    for (GridPoint p : sector_points(g, east)) got.insert(pos_key(g.pos(p)));
    std::set<PosKey> want{pos_key({Rat(1), Rat(0)}), pos_key({Rat(1), Rat(1)})};
    CHECK(got == want);

    Sector north{0, 1, kPi / 2, RadiusSq::from_radius(1.5)};
    got.clear();
    for (GridPoint p : sector_points(g, north)) got.insert(pos_key(g.pos(p)));
    want = {pos_key({Rat(0), Rat(1)}), pos_key({Rat(-1), Rat(1)})};
    CHECK(got == want);
}

TEST_CASE("opposite half-plane sectors partition the punctured disk") {
    Grid g = unit_grid();
    Sector right{1, 0, kPi, RadiusSq::from_radius(5)};
    Sector left{-1, 0, kPi, RadiusSq::from_radius(5)};
    auto a = sector_points(g, right);
    auto b = sector_points(g, left);
    std::set<PosKey> u;
    for (GridPoint p : a) u.insert(pos_key(g.pos(p)));
    for (GridPoint p : b) u.insert(pos_key(g.pos(p)));
    CHECK(a.size() + b.size() == u.size()); // disjoint
    CHECK(u == disk_pos_set(g, 5, true));
}

TEST_CASE("power sums over disks are exact for even powers") {
    Grid g = unit_grid();
    CHECK(power_sum(g, 0, RadiusSq::from_radius(2)) == 13.0);
    CHECK(power_sum(g, 2, RadiusSq::from_radius(1)) == 4.0);
    CHECK(power_sum(g, 2, RadiusSq::from_radius(2)) == 28.0);
    CHECK(power_sum(g, 1, RadiusSq::from_radius(1)) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("power sum asymptotics") {
    Grid g = unit_grid();
    CHECK(power_sum_asymptotic(g, 0, 1000) == doctest::Approx(kPi * 1e6).epsilon(1e-14));
    CHECK(power_sum_asymptotic(g, 2, 10) == doctest::Approx(kPi / 2 * 1e4).epsilon(1e-14));
    Grid e = eisenstein_grid();
    CHECK(power_sum_asymptotic(e, 2, 1) == doctest::Approx(kPi / (2 * e.covol())).epsilon(1e-14));
    // growth order sanity against the exact sum
    double exact = power_sum(g, 2, RadiusSq::from_radius(200));
    CHECK(std::fabs(exact / power_sum_asymptotic(g, 2, 200) - 1) < 0.02);
}

TEST_CASE("radius squared wrappers stay exact for representable radii") {
    RadiusSq r = RadiusSq::from_radius(1.5);
    CHECK(r.exact());
    CHECK(r.r2() == Rat(9, 4));
    CHECK(r.contains_norm2(Rat(9, 4)));
    CHECK(!r.contains_norm2(Rat(9, 4) + Rat(1, 1000000)));
    CHECK_THROWS_AS(RadiusSq::from_radius(-1), ValidationError);
    CHECK_THROWS_AS(RadiusSq::from_r2(Rat(-1)), ValidationError);
}

TEST_CASE("degenerate bases are rejected") {
    CHECK_THROWS_AS(Grid::make({Rat(1), Rat(0)}, {Rat(2), Rat(0)}), ValidationError);
    CHECK_THROWS_AS(Grid::make({Rat(0), Rat(0)}, {Rat(0), Rat(1)}), ValidationError);
    CHECK_THROWS_AS(Grid::make({Rat(1), Rat(0)}, {Rat(0), Rat(1)}, {}, 0), ValidationError);
}
