#include "doctest.h"

#include "core/error.hpp"
#include "density/expr.hpp"

using namespace sdr;

namespace {

double eval_bulk_expr(const std::string& text, const Vec& x, const Mat& a) {
    ExprPtr e = parse_expression(text);
    ExprEnv env;
    env.x = &x;
    env.A = &a;
    return e->eval_scalar(env);
}

double eval_surf_expr(const std::string& text, const Vec& lam, const Vec& nu) {
    ExprPtr e = parse_expression(text);
    ExprEnv env;
    env.lambda = &lam;
    env.nu = &nu;
    return e->eval_scalar(env);
}

}  // namespace

TEST_CASE("normsq of the identity matrix") {
    Mat id(2, 2, {1, 0, 0, 1});
    CHECK(eval_bulk_expr("normsq(A)", Vec{0, 0}, id) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("dot and abs on surface arguments") {
    CHECK(eval_surf_expr("abs(dot(lambda, nu))", Vec{1, 0}, Vec{1, 0}) == doctest::Approx(1.0));
    CHECK(eval_surf_expr("abs(dot(lambda, nu))", Vec{1, 0}, Vec{0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("x-dependent bulk formula") {
    Mat a(1, 2, {1, 0});
    CHECK(eval_bulk_expr("(1 + x[1]^2) * normsq(A)", Vec{1, 0}, a) == doctest::Approx(2.0));
}

TEST_CASE("syntax error carries the column") {
    try {
        parse_expression("normsq(A");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("column 9") != std::string::npos);
    }
}

TEST_CASE("unknown identifier and arity errors") {
    CHECK_THROWS_AS(parse_expression("norm(Q)"), Error);
    CHECK_THROWS_AS(parse_expression("dot(lambda)"), Error);
    CHECK_THROWS_AS(parse_expression("sqrt(1, 2)"), Error);
}

TEST_CASE("print-parse round trip is the identity on the tree") {
    const char* samples[] = {
        "normsq(A)",
        "sqrt(1 + normsq(A))",
        "2 * norm(lambda)",
        "abs(dot(lambda, nu))",
        "(1 + x[1]^2) * normsq(A) - x[1] / (2 + x[1])",
        "norm(A)^3",
        "min(norm(lambda), 2) + max(0.5, x[1])",
        "(x[1]^2)^3",
    };
    for (const char* s : samples) {
        ExprPtr e1 = parse_expression(s);
        std::string printed = e1->print();
        ExprPtr e2 = parse_expression(printed);
        CHECK_MESSAGE(e1->equal(*e2), "round trip failed for ", s, " printed as ", printed);
        CHECK(e2->print() == printed);
    }
}

TEST_CASE("division by zero is the one undefined point") {
    Mat a(1, 1, {0.0});
    CHECK_THROWS_AS(eval_bulk_expr("1 / norm(A)", Vec{0}, a), Error);
}

TEST_CASE("eval at many points agrees with a hand-coded closed form") {
    ExprPtr e = parse_expression("sqrt(1 + normsq(A))");
    for (double v = -3.0; v <= 3.0; v += 0.25) {
        Mat a(1, 1, {v});
        ExprEnv env;
        Vec x{0.0};
        env.x = &x;
        env.A = &a;
        CHECK(e->eval_scalar(env) == doctest::Approx(std::sqrt(1 + v * v)).epsilon(1e-14));
    }
}
