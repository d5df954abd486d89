#include "varcond/expr.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace varcond;

namespace {

JetCoordinate coord(int dep, std::vector<int> counts) {
    return JetCoordinate{dep, MultiIndex(std::move(counts))};
}

// n = 1, m = 1 shorthand
const JetCoordinate u = coord(1, {0});
const JetCoordinate u_x = coord(1, {1});
const JetCoordinate u_xx = coord(1, {2});

Point point1(double uv, double uxv) {
    Point p;
    p.indep = {0.0};
    p.jet[u] = uv;
    p.jet[u_x] = uxv;
    return p;
}

} // namespace

TEST_CASE("diff_wrt_coord: power, product, absent coordinate") {
    const Expr ux = Expr::jet(u_x);
    const Expr uu = Expr::jet(u);

    const Expr d1 = diff_wrt_coord(powi(ux, 2), u_x);
    CHECK(d1 == mul(Expr::constant(2.0), ux));

    const Expr d2 = diff_wrt_coord(mul(uu, ux), u);
    CHECK(d2 == ux);

    const Expr d3 = diff_wrt_coord(sin_of(uu), u_x);
    CHECK(d3.is_constant(0.0));
}

TEST_CASE("diff_wrt_indep treats jet coordinates as symbols") {
    const Expr x1 = Expr::indep(1);
    const Expr x2 = Expr::indep(2);

    CHECK(diff_wrt_indep(mul(x1, Expr::jet(u)), 1) == Expr::jet(u));
    CHECK(diff_wrt_indep(Expr::jet(u_x), 1).is_constant(0.0));
    CHECK(diff_wrt_indep(sin_of(x2), 2) == cos_of(x2));
}

TEST_CASE("substitute replaces bound coordinates simultaneously") {
    const Expr ux = Expr::jet(u_x);
    const Expr uu = Expr::jet(u);
    const Expr x1 = Expr::indep(1);

    JetBindings b1{{u_x, x1}};
    CHECK(substitute(powi(ux, 2), b1) == powi(x1, 2));

    JetBindings b2{{u, Expr::constant(0.0)}};
    CHECK(substitute(add(uu, ux), b2) == ux);

    CHECK(substitute(uu, JetBindings{}) == uu);

    // Simultaneous, not sequential: u -> u_x while u_x -> u.
    JetBindings swap{{u, ux}, {u_x, uu}};
    const Expr swapped = substitute(add(uu, mul(Expr::constant(3.0), ux)), swap);
    const Point p = point1(5.0, 7.0);
    CHECK(evaluate(swapped, p) == Catch::Approx(7.0 + 3.0 * 5.0));
}

TEST_CASE("evaluate computes IEEE doubles and reports domain errors") {
    const Expr e = add(powi(Expr::jet(u_x), 2), Expr::jet(u));
    CHECK(evaluate(e, point1(3.0, 2.0)) == 7.0);

    Point p2;
    p2.indep = {0.5, 4.0};
    CHECK(evaluate(mul(Expr::indep(1), Expr::indep(2)), p2) == 2.0);

    CHECK_THROWS_AS(evaluate(divide(Expr::constant(1.0), Expr::jet(u)), point1(0.0, 0.0)),
                    DomainError);
    CHECK_THROWS_AS(evaluate(log_of(Expr::jet(u)), point1(0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(evaluate(log_of(Expr::jet(u)), point1(-2.0, 1.0)), DomainError);
    CHECK_THROWS_AS(evaluate(sqrt_of(Expr::jet(u)), point1(-1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(evaluate(powi(Expr::jet(u), -2), point1(0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(evaluate(Expr::jet(u_xx), point1(0.0, 0.0)), UnboundCoordinate);
}

TEST_CASE("simplify: identities fold and evaluation is preserved") {
    const Expr uu = Expr::jet(u);
    const Expr ux = Expr::jet(u_x);
    const Expr uxx = Expr::jet(u_xx);

    CHECK(simplify(add(mul(Expr::constant(0.0), uxx), mul(Expr::constant(1.0), uu))) == uu);
    CHECK(simplify(sub(ux, ux)).is_constant(0.0));
    CHECK(simplify(mul(Expr::constant(2.0), Expr::constant(3.0))).is_constant(6.0));
    CHECK(simplify(neg(neg(uu))) == uu);
    CHECK(simplify(powi(uu, 0)).is_constant(1.0));
    CHECK(simplify(divide(uu, Expr::constant(1.0))) == uu);
    // Nested constants merge through Add/Mul chains.
    const Expr nested = add(Expr::constant(1.0), add(Expr::constant(2.0), uu));
    CHECK(simplify(nested) == add(Expr::constant(3.0), uu));
}

TEST_CASE("free_coordinates returns exactly the occurring coordinates") {
    const Expr e1 = add(powi(Expr::jet(u_x), 2), Expr::jet(u));
    CHECK(free_coordinates(e1) == std::set<JetCoordinate>{u, u_x});

    CHECK(free_coordinates(powi(Expr::indep(1), 2)).empty());

    const JetCoordinate u1_x1x2 = coord(1, {1, 1});
    const JetCoordinate u2 = coord(2, {0, 0});
    const Expr e2 = mul(Expr::jet(u1_x1x2), Expr::jet(u2));
    CHECK(free_coordinates(e2) == std::set<JetCoordinate>{u1_x1x2, u2});
}

TEST_CASE("property: Schwarz symmetry of repeated coordinate derivatives") {
    std::mt19937_64 rng(20240901);
    const std::vector<JetCoordinate> coords{u, u_x, u_xx};
    for (int rep = 0; rep < 40; ++rep) {
        const Expr e = testing::random_smooth_expr(rng, 1, coords, 4);
        const JetCoordinate a = coords[rng() % coords.size()];
        const JetCoordinate b = coords[rng() % coords.size()];
        const Expr dab = diff_wrt_coord(diff_wrt_coord(e, a), b);
        const Expr dba = diff_wrt_coord(diff_wrt_coord(e, b), a);
        for (int k = 0; k < 3; ++k) {
            const Point p = testing::random_point(rng, 1, coords);
            const double va = evaluate(dab, p);
            const double vb = evaluate(dba, p);
            CHECK(va == Catch::Approx(vb).margin(1e-9));
        }
    }
}

TEST_CASE("property: simplify preserves evaluation") {
    std::mt19937_64 rng(77001);
    const std::vector<JetCoordinate> coords{u, u_x};
    for (int rep = 0; rep < 60; ++rep) {
        const Expr e = testing::random_smooth_expr(rng, 1, coords, 5);
        const Expr s = simplify(e);
        for (int k = 0; k < 3; ++k) {
            const Point p = testing::random_point(rng, 1, coords);
            const double ve = evaluate(e, p);
            const double vs = evaluate(s, p);
            CHECK(vs == Catch::Approx(ve).epsilon(1e-12).margin(1e-12));
        }
    }
}

TEST_CASE("property: symbolic derivative matches central finite differences") {
    std::mt19937_64 rng(4242);
    const std::vector<JetCoordinate> coords{u, u_x};
    const double h = 1e-6;
    for (int rep = 0; rep < 40; ++rep) {
        const Expr e = testing::random_smooth_expr(rng, 1, coords, 4);
        const JetCoordinate c = coords[rng() % coords.size()];
        const Expr d = diff_wrt_coord(e, c);
        for (int k = 0; k < 2; ++k) {
            Point p = testing::random_point(rng, 1, coords);
            const double exact = evaluate(d, p);
            Point lo = p, hi = p;
            lo.jet[c] -= h;
            hi.jet[c] += h;
            const double approx = (evaluate(e, hi) - evaluate(e, lo)) / (2.0 * h);
            CHECK(approx == Catch::Approx(exact).epsilon(1e-5).margin(1e-5));
        }
    }
}

TEST_CASE("property: substitute then evaluate equals evaluate with composed bindings") {
    std::mt19937_64 rng(90210);
    const std::vector<JetCoordinate> coords{u, u_x};
    for (int rep = 0; rep < 30; ++rep) {
        const Expr e = testing::random_smooth_expr(rng, 1, coords, 4);
        // Bind u -> polynomial in x1, leave u_x free.
        const Expr repl = add(mul(Expr::constant(0.5), Expr::indep(1)),
                              powi(Expr::indep(1), 2));
        JetBindings bindings{{u, repl}};
        const Expr substituted = substitute(e, bindings);
        for (int k = 0; k < 3; ++k) {
            Point p = testing::random_point(rng, 1, coords);
            Point composed = p;
            Point xonly;
            xonly.indep = p.indep;
            composed.jet[u] = evaluate(repl, xonly);
            CHECK(evaluate(substituted, p) ==
                  Catch::Approx(evaluate(e, composed)).epsilon(1e-12).margin(1e-12));
        }
    }
}

TEST_CASE("printing round-trips through shortest decimal form") {
    CHECK(to_string(Expr::constant(2.0)) == "2");
    CHECK(to_string(add(Expr::jet(u), powi(Expr::jet(u_x), 2))) == "u1 + u1_x1^2");
    CHECK(to_string(neg(mul(Expr::constant(2.0), Expr::jet(u)))) == "-2*u1");
    CHECK(to_string(neg(add(Expr::jet(u), Expr::constant(1.0)))) == "-(1 + u1)");
    CHECK(to_string(powi(Expr::jet(u), -2)) == "u1^(-2)");
}
