#include <doctest.h>

#include "gridhub/numtext.hpp"

using namespace gridhub;

TEST_CASE("format_double prints shortest exact decimals") {
    CHECK(format_double(12.0) == "12");
    CHECK(format_double(0.48) == "0.48");
    CHECK(format_double(12.091) == "12.091");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(0.074 / 3.0) == "0.024666666666666667");
}

TEST_CASE("format/parse round-trips arbitrary doubles") {
    double values[] = {1.0 / 3.0, 6e-7, -123456.789, 2.2250738585072014e-308, 5.5};
    for (double v : values) CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("parse_double is strict") {
    CHECK(parse_double("12.5") == 12.5);
    CHECK(parse_double("+0.013") == 0.013);
    CHECK(!parse_double("12.5x"));
    CHECK(!parse_double(""));
    CHECK(!parse_double("1,5"));
    CHECK(!parse_double("nan"));
    CHECK(!parse_double("inf"));
}

TEST_CASE("complex text form a+bj") {
    CHECK(format_complex({0.0246667, 0.013}) == "0.0246667+0.013j");
    CHECK(format_complex({1.0, -2.5}) == "1-2.5j");
    CHECK(format_complex({0, 0}) == "0+0j");

    auto z = parse_complex("0.024666666666666667+0.013j");
    REQUIRE(z.has_value());
    CHECK(z->real() == 0.024666666666666667);
    CHECK(z->imag() == 0.013);

    CHECK(parse_complex("1e-3-2e-4j") == Complex(1e-3, -2e-4));
    CHECK(!parse_complex("12"));
    CHECK(!parse_complex("1+j"));
    CHECK(!parse_complex("1 + 2j"));
}

TEST_CASE("format_fixed") {
    CHECK(format_fixed(277.1281292110204, 3) == "277.128");
    CHECK(format_fixed(6928.203230275509, 3) == "6928.203");
    CHECK(format_fixed(-0.0001, 3) == "0.000");
    CHECK(format_fixed(-0.04, 1) == "0.0");
}

TEST_CASE("shortest_within recovers nominal-class values") {
    // implied kV from a millivolt-rounded line-to-neutral voltage
    CHECK(shortest_within(277.128 * kSqrt3 / 1000.0, 5e-6) == 0.48);
    CHECK(shortest_within(6928.203 * kSqrt3 / 1000.0, 5e-6) == 12.0);
    CHECK(shortest_within(12.47, 5e-6) == 12.47);
    // nothing short within tolerance: value returned untouched
    double odd = 12.3456789012;
    CHECK(shortest_within(odd, 1e-15) == odd);
}
