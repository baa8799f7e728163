#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "nullgeo/expr.hpp"

using namespace nullgeo;

namespace {
const std::vector<std::string> XYZ = {"x", "y", "z"};
double ev(const ExprField& f, std::initializer_list<double> pt) {
    std::vector<double> v(pt);
    return f.eval(v);
}
}  // namespace

TEST_CASE("quadratic form of the worked example") {
    ExprField f = ExprField::parse("x^2 + y^2 - z^2", XYZ);
    CHECK(ev(f, {1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ev(f, {3, 4, 5}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("constants and simple functions") {
    ExprField zero = ExprField::parse("0", {"x"});
    CHECK(ev(zero, {42.0}) == 0.0);
    ExprField sc = ExprField::parse("sin(t)*cos(t)", {"t"});
    // independent arithmetic: sin*cos = sin(2t)/2 = 1/2 at t = pi/4
    CHECK(ev(sc, {M_PI / 4}) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ev(ExprField::parse("atan2(1, 1)", {"x"}), {0.0}) ==
          doctest::Approx(M_PI / 4).epsilon(1e-15));
    CHECK(ev(ExprField::parse("abs(-2.5)", {"x"}), {0.0}) == 2.5);
    CHECK(ev(ExprField::parse("sqrt(sinh(0) + cosh(0))", {"x"}), {0.0}) == 1.0);
}

TEST_CASE("operator precedence and associativity") {
    // ^ binds tighter than unary minus; right-associative
    CHECK(ev(ExprField::parse("-2^2", {"x"}), {0.0}) == -4.0);
    CHECK(ev(ExprField::parse("(-2)^2", {"x"}), {0.0}) == 4.0);
    CHECK(ev(ExprField::parse("2^3^2", {"x"}), {0.0}) == 512.0);
    CHECK(ev(ExprField::parse("2^-1", {"x"}), {0.0}) == 0.5);
    CHECK(ev(ExprField::parse("1 - 2 - 3", {"x"}), {0.0}) == -4.0);
    CHECK(ev(ExprField::parse("6/3/2", {"x"}), {0.0}) == 1.0);
    CHECK(ev(ExprField::parse("2*3^2", {"x"}), {0.0}) == 18.0);
    CHECK(ev(ExprField::parse("1 + 2*3", {"x"}), {0.0}) == 7.0);
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(ExprField::parse("", {"x"}), ParseError);
    CHECK_THROWS_AS(ExprField::parse("x +", {"x"}), ParseError);
    CHECK_THROWS_AS(ExprField::parse("(x", {"x"}), ParseError);
    try {
        ExprField::parse("x + qq", {"x"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("qq") != std::string::npos);
    }
    // unknown function names are unknown identifiers too
    CHECK_THROWS_AS(ExprField::parse("foo(2)", {"x"}), ParseError);
}

TEST_CASE("evaluation domain errors carry the point") {
    ExprField f = ExprField::parse("log(x)", {"x"});
    try {
        ev(f, {-1.0});
        FAIL("expected EvalDomainError");
    } catch (const EvalDomainError& e) {
        REQUIRE(e.point().size() == 1);
        CHECK(e.point()[0] == -1.0);
    }
    CHECK_THROWS_AS(ev(ExprField::parse("1/x", {"x"}), {0.0}), EvalDomainError);
    CHECK_THROWS_AS(ev(ExprField::parse("sqrt(x)", {"x"}), {-4.0}), EvalDomainError);
}

TEST_CASE("central differences: polynomials near-exact") {
    ExprField sq = ExprField::parse("x^2", {"x"});
    std::vector<double> at3 = {3.0};
    CHECK(sq.partial(at3, 0, 1e-5) == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(sq.partial(at3, 0) == doctest::Approx(6.0).epsilon(1e-9));

    ExprField inv = ExprField::parse("1/r", {"r"});
    std::vector<double> at2 = {2.0};
    CHECK(inv.partial(at2, 0, 1e-5) == doctest::Approx(-0.25).epsilon(1e-7));

    ExprField bil = ExprField::parse("x*y", {"x", "y"});
    std::vector<double> p = {2.0, 5.0};
    CHECK(bil.partial(p, 1) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("second partials against closed forms") {
    ExprField f = ExprField::parse("x^2*y + sin(y)", {"x", "y"});
    std::vector<double> p = {1.5, 0.8};
    CHECK(f.second_partial(p, 0, 0) == doctest::Approx(2 * 0.8).epsilon(1e-5));
    CHECK(f.second_partial(p, 0, 1) == doctest::Approx(2 * 1.5).epsilon(1e-5));
    CHECK(f.second_partial(p, 1, 1) == doctest::Approx(-std::sin(0.8)).epsilon(1e-4));
}

TEST_CASE("property: derivative is linear") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    ExprField f = ExprField::parse("sin(x)*y + x^2", {"x", "y"});
    ExprField g = ExprField::parse("cos(y) - x*y", {"x", "y"});
    ExprField sum = ExprField::parse("sin(x)*y + x^2 + cos(y) - x*y", {"x", "y"});
    // shared stencil: truncation cancels exactly, only rounding remains
    const double h = 1e-3;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> p = {d(rng), d(rng)};
        for (int k = 0; k < 2; ++k) {
            double lhs = sum.partial(p, k, h);
            double rhs = f.partial(p, k, h) + g.partial(p, k, h);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: pretty-print round-trips with identical values") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(0.1, 2.5);
    const char* sources[] = {
        "x^2 + y^2 - z^2",
        "sin(x)*cos(y) - tanh(z)",
        "1/(x + 3) + exp(-y)*z",
        "-x^2 + atan2(y, z + 4)",
        "sqrt(x + 5)*log(y + 3)",
    };
    for (const char* src : sources) {
        ExprField f = ExprField::parse(src, XYZ);
        ExprField g = ExprField::parse(f.pretty(), XYZ);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> p = {d(rng), d(rng), d(rng)};
            CHECK(f.eval(p) == g.eval(p));  // bitwise identical
        }
    }
}

TEST_CASE("determinism: identical point gives identical bits") {
    ExprField f = ExprField::parse("sin(x)*exp(y)/(z + 2)", XYZ);
    std::vector<double> p = {0.3, 1.7, 0.9};
    double a = f.eval(p);
    double b = f.eval(p);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}
