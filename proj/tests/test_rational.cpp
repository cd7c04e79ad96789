#include "doctest.h"

#include <cmath>

#include "latcorr/rational.hpp"

using namespace latcorr;

TEST_CASE("rationals reduce to lowest terms with positive denominator") {
    CHECK(Rat(6, 4) == Rat(3, 2));
    CHECK(Rat(-6, 4) == Rat(-3, 2));
    CHECK(Rat(6, -4) == Rat(-3, 2));
    CHECK(Rat(-6, -4) == Rat(3, 2));
    CHECK(Rat(0, 7) == Rat(0));
    CHECK(Rat(5, 1).is_integer());
    CHECK(!Rat(5, 2).is_integer());
    CHECK(Rat(7, 3).num() == 7);
    CHECK(Rat(7, 3).den() == 3);
}

TEST_CASE("rational arithmetic is exact") {
    CHECK(Rat(1, 3) + Rat(1, 6) == Rat(1, 2));
    CHECK(Rat(1, 3) - Rat(1, 2) == Rat(-1, 6));
    CHECK(Rat(2, 3) * Rat(9, 4) == Rat(3, 2));
    CHECK(Rat(2, 3) / Rat(4, 9) == Rat(3, 2));
    CHECK(-Rat(3, 5) == Rat(-3, 5));
    CHECK(abs(Rat(-3, 5)) == Rat(3, 5));
    Rat a(1, 7);
    a += Rat(2, 7);
    a *= Rat(7, 3);
    CHECK(a == Rat(1));
    CHECK_THROWS_AS(Rat(1, 2) / Rat(0), ValidationError);
    CHECK_THROWS_AS(Rat(1, 0), ValidationError);
}

TEST_CASE("rational ordering is exact for large cross products") {
    CHECK(Rat(1, 3) < Rat(1, 2));
    CHECK(Rat(-1, 2) < Rat(-1, 3));
    CHECK(Rat(1000000007, 1000000009) < Rat(1));
    CHECK(Rat(2, 3) <= Rat(2, 3));
    CHECK(Rat(5, 4) > Rat(1));
}

TEST_CASE("floor and round-half-up handle negatives and ties") {
    CHECK(Rat(7, 2).floor() == 3);
    CHECK(Rat(-7, 2).floor() == -4);
    CHECK(Rat(-1, 3).floor() == -1);
    CHECK(Rat(6, 3).floor() == 2);
    // ties go toward +infinity
    CHECK(Rat(1, 2).round_half_up() == 1);
    CHECK(Rat(-1, 2).round_half_up() == 0);
    CHECK(Rat(3, 2).round_half_up() == 2);
    CHECK(Rat(-3, 2).round_half_up() == -1);
    CHECK(Rat(2, 5).round_half_up() == 0);
    CHECK(Rat(-2, 5).round_half_up() == 0);
}

TEST_CASE("from_double captures the exact binary value") {
    CHECK(Rat::from_double(0.5) == Rat(1, 2));
    CHECK(Rat::from_double(-2.25) == Rat(-9, 4));
    CHECK(Rat::from_double(3.0) == Rat(3));
    // 0.1 is not 1/10 in binary
    Rat tenth = Rat::from_double(0.1);
    CHECK(tenth != Rat(1, 10));
    CHECK(tenth.to_double() == 0.1);
    CHECK_THROWS_AS(Rat::from_double(1e300), OverflowError);
    CHECK_THROWS_AS(Rat::from_double(std::nan("")), ValidationError);
}

TEST_CASE("overflow beyond 64-bit reduced terms throws instead of wrapping") {
    Rat big(INT64_MAX / 2, 1);
    CHECK_THROWS_AS(big * big, OverflowError);
    CHECK_NOTHROW(Rat::from_int128((int128)1 << 70, (int128)1 << 68));
    CHECK(Rat::from_int128((int128)1 << 70, (int128)1 << 68) == Rat(4));
}

TEST_CASE("string form is numerator slash denominator") {
    CHECK(Rat(3, 2).str() == "3/2");
    CHECK(Rat(-3, 2).str() == "-3/2");
    CHECK(Rat(5).str() == "5");
}
