#include <doctest.h>

#include <cmath>
#include <random>

#include "weylscope/error.hpp"
#include "weylscope/expression.hpp"

using namespace weylscope;

TEST_SUITE("expression") {

TEST_CASE("parse and print round trip") {
    const char* sources[] = {"x0 + x1*x2", "-x0^2", "(x0 + 1)^-2", "exp(sin(x1))/(1 + x3^2)", "x0 - (x1 - x2)",
                             "x0/(x1*x2)", "2^3^2", "log(1 + x0^2 + x1^2 + x2^2 + x3^2)", "sqrt(atan(x2) + 4)",
                             "1.5e-3*cos(x3)", "-(x0 + x1)", "(-x0)^2", "x0^(1/3)", "0.1*x0 - -x1"};
    for (const char* s : sources) {
        const Expression e = parse_expression(s);
        const std::string printed = to_string(e);
        CHECK_MESSAGE(parse_expression(printed) == e, s << " -> " << printed);
        CHECK(to_string(parse_expression(printed)) == printed);
    }
}

TEST_CASE("precedence and associativity") {
    const Point4 p{2.0, 3.0, 0.5, -1.0};
    CHECK(evaluate(parse_expression("-x0^2"), p) == doctest::Approx(-4.0));
    CHECK(evaluate(parse_expression("2^3^2"), p) == doctest::Approx(512.0));
    CHECK(evaluate(parse_expression("x1 - x0 - 1"), p) == doctest::Approx(0.0));
    CHECK(evaluate(parse_expression("x1 / x0 / 2"), p) == doctest::Approx(0.75));
    CHECK(evaluate(parse_expression("1 + 2 * 3"), p) == doctest::Approx(7.0));
    CHECK(evaluate(parse_expression("x0^-1"), p) == doctest::Approx(0.5));
}

TEST_CASE("parse errors carry offset and expectations") {
    try {
        parse_expression("x0 + * x1");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
        CHECK_FALSE(e.expected().empty());
    }
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x4"), ParseError);
    CHECK_THROWS_AS(parse_expression("sin x0"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x0"), ParseError);
    CHECK_THROWS_AS(parse_expression("x0 x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("tan(x0)"), ParseError);
    CHECK_THROWS_AS(parse_expression("1e"), ParseError);
}

TEST_CASE("jets agree with finite differences") {
    const Expression e = parse_expression("exp(0.3*x0*x1)*sin(x2 + 0.5*x3^2) + sqrt(2 + x0^2)*atan(x1 - x3) + (1 + x2^2)^-1.5");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-0.7, 0.7);
    for (int t = 0; t < 10; ++t) {
        const Point4 p{d(rng), d(rng), d(rng), d(rng)};
        const Jet exact = jet_eval(e, p, 2);
        const Jet approx = fd_jet(e, p, 2, 1e-2);
        for (std::size_t i = 0; i < exact.size(); ++i) CHECK(approx.taylor(i) == doctest::Approx(exact.taylor(i)).epsilon(1e-6).scale(1.0));
        CHECK(exact.value() == doctest::Approx(evaluate(e, p)).epsilon(1e-14));
    }
}

TEST_CASE("variable exponents and domain errors") {
    const Point4 p{0.5, 2.0, 0.0, 0.0};
    CHECK(evaluate(parse_expression("x1^x0"), p) == doctest::Approx(std::sqrt(2.0)));
    const Jet j = jet_eval(parse_expression("x1^x0"), p, 1);
    CHECK(j.derivative({1, 0, 0, 0}) == doctest::Approx(std::sqrt(2.0) * std::log(2.0)));
    CHECK(j.derivative({0, 1, 0, 0}) == doctest::Approx(0.5 * std::pow(2.0, -0.5)));
    CHECK_THROWS_AS(evaluate(parse_expression("log(x2)"), p), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expression("1/x2"), p), DomainError);
    CHECK_THROWS_AS(jet_eval(parse_expression("sqrt(x2)"), p, 1), DomainError);
    CHECK(evaluate(parse_expression("(x2 - 1)^3"), p) == doctest::Approx(-1.0));
}

TEST_CASE("constant detection") {
    CHECK(parse_expression("2*exp(1)").is_constant());
    CHECK_FALSE(parse_expression("2*x3").is_constant());
}

}  // TEST_SUITE
