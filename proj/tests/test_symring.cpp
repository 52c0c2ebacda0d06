#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jgeo/errors.hpp"
#include "jgeo/matrix.hpp"
#include "jgeo/parse.hpp"

using namespace jgeo;

namespace {

ExpPoly P(const PatchPtr& p, const std::string& s) { return parse_scalar(s, p); }

Rat pow10(int k) {
    Int d = 1;
    for (int i = 0; i < k; ++i) d *= 10;
    return Rat(Int(1), d);
}

} // namespace

TEST_CASE("ring normal form and axioms") {
    auto p = make_patch({"x", "y"});
    ExpPoly x = ExpPoly::variable(p, "x"), y = ExpPoly::variable(p, "y");

    CHECK(x + y - x - y == ExpPoly::zero(p));
    CHECK((x + ExpPoly::constant(p, 1)).pow(2) - x * x - x.scaled(2) - ExpPoly::constant(p, 1) ==
          ExpPoly::zero(p));

    std::vector<ExpPoly> samples = {
        x, y, P(p, "1/2*x^2 - y"), P(p, "exp(x - 2*y)"), P(p, "(x + y)*exp(y) - 3"),
    };
    for (const auto& a : samples)
        for (const auto& b : samples) {
            CHECK(a + b == b + a);
            CHECK(a * b == b * a);
            for (const auto& c : samples) {
                CHECK((a + b) + c == a + (b + c));
                CHECK((a * b) * c == a * (b * c));
                CHECK(a * (b + c) == a * b + a * c);
            }
        }
}

TEST_CASE("derivative of exp-polynomial terms") {
    auto p = make_patch({"x", "t"});
    ExpPoly f = P(p, "(x + t)*exp(-t)");
    CHECK(f.derivative("t") == P(p, "(1 - x - t)*exp(-t)"));
    CHECK(f.derivative("x") == P(p, "exp(-t)"));

    ExpPoly g = P(p, "(x + t)^3*exp(2*x - t)");
    CHECK(g.derivative("x").derivative("t") == g.derivative("t").derivative("x"));

    // Leibniz rule
    for (const auto& a : {f, g, P(p, "x^2*t - exp(x)")})
        for (const auto& b : {f, P(p, "t*exp(-x + 3*t)")}) {
            CHECK((a * b).derivative("x") == a.derivative("x") * b + a * b.derivative("x"));
            CHECK((a * b).derivative("t") == a.derivative("t") * b + a * b.derivative("t"));
        }
}

TEST_CASE("affine substitution") {
    auto p = make_patch({"x", "y"});
    ExpPoly f = P(p, "(x + y)^2");
    CHECK(f.substitute_one("x", P(p, "y + 1")) == P(p, "4*y^2 + 4*y + 1"));

    auto pt = make_patch({"t"});
    auto pts = make_patch({"t", "s"});
    ExpPoly et = P(pt, "exp(t)");
    CHECK(et.substitute({P(pts, "t + s")}) == P(pts, "exp(t + s)"));
    CHECK(et.substitute({P(pt, "t + 1")}) == P(pt, "exp(1 + t)"));
    CHECK_THROWS_AS(et.substitute({P(pt, "t^2")}), unsupported_substitution);

    // chain rule through an affine change of variables
    auto py = make_patch({"y"});
    ExpPoly fx = P(p, "(x + y)^3*exp(x - 2*y)");
    std::vector<ExpPoly> phi = {P(py, "2*y + 1"), P(py, "y - 3")};
    ExpPoly lhs = fx.substitute(phi).derivative("y");
    ExpPoly rhs = fx.derivative("x").substitute(phi) * phi[0].derivative("y") +
                  fx.derivative("y").substitute(phi) * phi[1].derivative("y");
    CHECK(lhs == rhs);
}

TEST_CASE("exact evaluation at rational points") {
    auto p = make_patch({"x", "y"});
    ExpPoly f = P(p, "x^2 - exp(x - y)");
    EvalResult r = f.evaluate({Rat(2), Rat(2)});
    CHECK(r.exact);
    CHECK(r.value == Rat(3));

    auto empty = make_patch({});
    auto pt = make_patch({"x", "t"});
    ExpPoly g = P(pt, "(x + t)*exp(-t)");
    ExpPoly v = g.at_point({Rat(1), Rat(2)}, empty);
    CHECK(v == ExpPoly::term(empty, Rat(3), {}, Rat(-2), {}));
    // constants c*exp(q) with distinct rational q are linearly independent,
    // so symbolic equality of point values is trustworthy
    CHECK(v - ExpPoly::term(empty, Rat(3), {}, Rat(-2), {}) == ExpPoly::zero(empty));
}

TEST_CASE("rigorous interval enclosure of exp") {
    // frozen decimal brackets: truncations of e and 1/e to 30 places
    Rat w = pow10(30);
    {
        RatInterval box = enclose_exp(Rat(1), w);
        Rat a(Int("2718281828459045235360287471352"));
        CHECK(box.width() <= w);
        CHECK(box.hi >= a * pow10(30));
        CHECK(box.lo <= (a + 1) * pow10(30));
    }
    {
        RatInterval box = enclose_exp(Rat(-1), w);
        Rat a(Int("367879441171442321595523770161"));
        CHECK(box.width() <= w);
        CHECK(box.hi >= a * pow10(30));
        CHECK(box.lo <= (a + 1) * pow10(30));
    }
    {
        // e^{7/2} = 33.115451958692313750653249350388... ; bracket to 27 places
        RatInterval box = enclose_exp(Rat(7, 2), pow10(27));
        Rat a(Int("33115451958692313750653249350388"));
        CHECK(box.width() <= pow10(27));
        CHECK(box.hi >= a * pow10(30));
        CHECK(box.lo <= (a + 1) * pow10(30));
    }

    auto p = make_patch({"t"});
    ExpPoly f = P(p, "exp(-t)");
    EvalResult r = f.evaluate({Rat(1)});
    CHECK_FALSE(r.exact);
    CHECK(r.box.width() <= pow10(30));
}

TEST_CASE("units and exact division") {
    auto p = make_patch({"t", "x"});
    ExpPoly u = P(p, "3*exp(2*t)");
    CHECK(u.is_unit());
    CHECK(u.unit_inverse() == P(p, "1/3*exp(-2*t)"));
    CHECK(u * u.unit_inverse() == ExpPoly::constant(p, 1));
    CHECK(u.pow(-2) == P(p, "1/9*exp(-4*t)"));
    CHECK_FALSE(P(p, "x + 1").is_unit());
    CHECK_THROWS_AS(P(p, "x + 1").unit_inverse(), precondition_error);

    ExpPoly f = P(p, "x*exp(2*t) + exp(3*t)");
    CHECK(f.divided_by_unit(u) == P(p, "1/3*x + 1/3*exp(t)"));
}

TEST_CASE("linear solves return adjugate solution and determinant") {
    auto p = make_patch({"x", "y"});
    ExpPoly x = ExpPoly::variable(p, "x"), y = ExpPoly::variable(p, "y");

    RingMat m = RingMat::from_rows(
        p, {{ExpPoly::constant(p, 1), -y}, {ExpPoly::zero(p), ExpPoly::constant(p, 1)}});
    LinearSolution s = solve_linear(m, {x, y});
    CHECK(s.det == ExpPoly::constant(p, 1));
    CHECK(s.scaled_x[0] == x + y * y);
    CHECK(s.scaled_x[1] == y);
    // defining identity M * X = det(M) * rhs
    auto mx = m.apply(s.scaled_x);
    CHECK(mx[0] == s.det * x);
    CHECK(mx[1] == s.det * y);

    RingMat d = RingMat::from_rows(p, {{x, ExpPoly::zero(p)}, {ExpPoly::zero(p), x}});
    LinearSolution sd = solve_linear(d, {ExpPoly::constant(p, 1), y});
    CHECK(sd.det == x * x);
    CHECK(sd.scaled_x[0] == x);
    CHECK(sd.scaled_x[1] == x * y);
    CHECK_THROWS_AS(solve_unit_det(d, {ExpPoly::constant(p, 1), y}), singular_matrix_error);

    // unit determinant: division happens
    RingMat e = RingMat::from_rows(p, {{P(p, "exp(x)"), y}, {ExpPoly::zero(p), P(p, "2")}});
    auto xs = solve_unit_det(e, {y, P(p, "4")});
    CHECK(xs[0] == P(p, "-y*exp(-x)"));
    CHECK(xs[1] == P(p, "2"));
    CHECK(e.apply(xs)[0] == y);
    CHECK(e.apply(xs)[1] == P(p, "4"));

    // adjugate identity on a full symbolic 3x3
    auto q = make_patch({"a", "b", "c"});
    ExpPoly a = ExpPoly::variable(q, "a"), b = ExpPoly::variable(q, "b"),
            c = ExpPoly::variable(q, "c");
    RingMat g = RingMat::from_rows(q, {{a, b, ExpPoly::constant(q, 1)},
                                       {ExpPoly::constant(q, 1), c, b * c},
                                       {P(q, "exp(a)"), ExpPoly::zero(q), a + c}});
    RingMat ga = g * adjugate(g);
    ExpPoly dg = det(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(ga.at(i, j) == (i == j ? dg : ExpPoly::zero(q)));
}

TEST_CASE("matrix inverse with unit determinant") {
    auto p = make_patch({"t", "x"});
    RingMat m = RingMat::from_rows(p, {{P(p, "exp(-t)"), P(p, "x")},
                                       {ExpPoly::zero(p), P(p, "2*exp(t)")}});
    RingMat inv = inverse_unit_det(m);
    CHECK(m * inv == RingMat::identity(p, 2));
    CHECK(inv * m == RingMat::identity(p, 2));
}

TEST_CASE("parser round trips and rejects bad input") {
    auto p = make_patch({"x", "y", "t"});
    std::vector<std::string> exprs = {
        "0",
        "-x",
        "1/2*x^2 - y + 3",
        "(x + y)^3*exp(x - 2*y)",
        "exp(1/2 + t)*x - exp(-t)",
        "2*exp(3*t) + x*y*t",
    };
    for (const auto& s : exprs) {
        ExpPoly e = P(p, s);
        CHECK(P(p, e.text()) == e);
    }
    CHECK(P(p, "(x + t)*exp(-t)").derivative("t").text() == "exp(-t) - t*exp(-t) - x*exp(-t)");

    CHECK_THROWS_AS(P(p, "x/2"), parse_error);
    CHECK_THROWS_AS(P(p, "exp(x^2)"), parse_error);
    CHECK_THROWS_AS(P(p, "w + 1"), parse_error);
    CHECK_THROWS_AS(P(p, "(x"), parse_error);
    try {
        P(p, "x +\n  @");
    } catch (const parse_error& err) {
        CHECK(err.line == 2);
        CHECK(err.col == 3);
    }
}

TEST_CASE("patch transport") {
    auto small = make_patch({"x", "y"});
    auto big = make_patch({"z", "x", "y"});
    ExpPoly f = P(small, "x*exp(y) + 2");
    CHECK(f.transported(big) == P(big, "x*exp(y) + 2"));
    CHECK_THROWS_AS(P(small, "y").transported(make_patch({"x"})), structural_error);
}
