#include <doctest.h>

#include <cmath>

#include "plfem/errors.hpp"
#include "plfem/expr.hpp"

using namespace plfem;

TEST_CASE("expression arithmetic and precedence") {
    CHECK(Expr::parse("1 + 2 * 3").eval(0, 0) == 7.0);
    CHECK(Expr::parse("(1 + 2) * 3").eval(0, 0) == 9.0);
    CHECK(Expr::parse("2 ^ 3 ^ 2").eval(0, 0) == 512.0);         // right associative
    CHECK(Expr::parse("-2 ^ 2").eval(0, 0) == -4.0);             // unary minus binds weaker
    CHECK(Expr::parse("6 / 3 / 2").eval(0, 0) == 1.0);
    CHECK(Expr::parse("1 - 2 - 3").eval(0, 0) == -4.0);
    CHECK(Expr::parse("x*y + u").eval(2, 3, 4) == 10.0);
    CHECK(Expr::parse("x^2 - y").eval(3, 1) == 8.0);
}

TEST_CASE("expression functions and constants") {
    CHECK(Expr::parse("abs(-3)").eval(0, 0) == 3.0);
    CHECK(Expr::parse("min(2, -1)").eval(0, 0) == -1.0);
    CHECK(Expr::parse("max(2, -1)").eval(0, 0) == 2.0);
    CHECK(Expr::parse("cos(pi)").eval(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Expr::parse("sin(pi/2)").eval(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Expr::parse("sqrt(2)^2").eval(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(Expr::parse("exp(0)").eval(0, 0) == 1.0);
    CHECK(std::fabs(Expr::parse("cos(pi*x)").eval(0.5, 0)) < 1e-15);
}

TEST_CASE("expression u dependence and the time alias") {
    CHECK(Expr::parse("x + y").depends_on_u() == false);
    CHECK(Expr::parse("abs(u)^2").depends_on_u() == true);
    CHECK(Expr::parse("t").depends_on_u() == true);   // t shares the third slot
    CHECK(Expr::parse("sin(t)*x").eval(2.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("expression syntax errors") {
    CHECK_THROWS_AS(Expr::parse(""), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("1 +"), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("(1"), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("min(1)"), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("bogus(1)"), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("1 2"), InvalidParameter);
    CHECK_THROWS_AS(Expr::parse("x $ y"), InvalidParameter);
}
