#include "varcond/hessian.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace varcond;

namespace {

JetCoordinate coord(int dep, std::vector<int> counts) {
    return JetCoordinate{dep, MultiIndex(std::move(counts))};
}

struct NamedLagrangian {
    const char* name;
    JetSpec spec;
    Expr lagrangian;
};

// The recurring test Lagrangians: Dirichlet energy, two quadratic energies,
// the biharmonic energy, minimal surface area, and a coupled system.
std::vector<NamedLagrangian> test_lagrangians() {
    std::vector<NamedLagrangian> out;
    {
        JetSpec spec(2, 1, 1);
        const Expr ux1 = Expr::jet(coord(1, {1, 0})), ux2 = Expr::jet(coord(1, {0, 1}));
        out.push_back({"dirichlet", spec, add(powi(ux1, 2), powi(ux2, 2))});
    }
    {
        JetSpec spec(1, 1, 1);
        const Expr u = Expr::jet(coord(1, {0})), ux = Expr::jet(coord(1, {1}));
        out.push_back({"u^2+u_x^2", spec, add(powi(u, 2), powi(ux, 2))});
        out.push_back({"u_x^2-u^2", spec, sub(powi(ux, 2), powi(u, 2))});
    }
    {
        JetSpec spec(1, 1, 2);
        out.push_back({"biharmonic", spec, powi(Expr::jet(coord(1, {2})), 2)});
    }
    {
        JetSpec spec(2, 1, 1);
        const Expr ux1 = Expr::jet(coord(1, {1, 0})), ux2 = Expr::jet(coord(1, {0, 1}));
        out.push_back({"minimal-surface", spec,
                       sqrt_of(add(Expr::constant(1.0),
                                   add(powi(ux1, 2), powi(ux2, 2))))});
    }
    {
        JetSpec spec(1, 2, 1);
        out.push_back({"coupled", spec,
                       mul(Expr::jet(coord(1, {1})), Expr::jet(coord(2, {1})))});
    }
    return out;
}

} // namespace

TEST_CASE("hessian of u^2 + u_x^2 is the constant diag(2, 2)") {
    const JetSpec spec(1, 1, 1);
    const Expr u = Expr::jet(coord(1, {0})), ux = Expr::jet(coord(1, {1}));
    const HessianMatrix a = build_hessian(add(powi(u, 2), powi(ux, 2)), spec);
    REQUIRE(a.dim() == 2);
    CHECK(a.entry(0, 0).is_constant(2.0));
    CHECK(a.entry(1, 1).is_constant(2.0));
    CHECK(a.entry(0, 1).is_constant(0.0));
    CHECK(a.entry(1, 0).is_constant(0.0));
    CHECK(a.structural_zeros() == 2);

    Point p;
    p.indep = {0.7};
    p.jet[coord(1, {0})] = -3.0;
    p.jet[coord(1, {1})] = 11.0;
    const Matrix m = evaluate_hessian_at(a, p);
    CHECK(m(0, 0) == 2.0);
    CHECK(m(1, 1) == 2.0);
    CHECK(m(0, 1) == 0.0);
}

TEST_CASE("block layout for m = 2, s = 2 matches the worked example") {
    SECTION("n = 1: each A^{jj'} is a 3x3 grid of scalars") {
        const JetSpec spec(1, 2, 2);
        const Expr L = mul(powi(Expr::jet(coord(1, {2})), 2),
                           powi(Expr::jet(coord(2, {1})), 2));
        const HessianMatrix a = build_hessian(L, spec);
        CHECK(a.dim() == 6);
        for (int k = 0; k <= 2; ++k)
            for (int kp = 0; kp <= 2; ++kp)
                CHECK(a.block_shape(k, kp) == std::pair{1, 1});
        // Block view addresses the same storage as the flat view.
        for (int j = 1; j <= 2; ++j)
            for (int jp = 1; jp <= 2; ++jp)
                for (int k = 0; k <= 2; ++k)
                    for (int kp = 0; kp <= 2; ++kp)
                        CHECK(a.block_entry(j, jp, k, kp, 0, 0) ==
                              a.entry((j - 1) * 3 + k, (jp - 1) * 3 + kp));
    }

    SECTION("n = 2: sub-block shapes follow p_0, p_1, p_2 = 1, 2, 3") {
        const JetSpec spec(2, 2, 2);
        const Expr L = mul(Expr::jet(coord(1, {1, 1})), Expr::jet(coord(2, {0, 1})));
        const HessianMatrix a = build_hessian(L, spec);
        CHECK(a.dim() == 12);
        CHECK(a.block_shape(0, 0) == std::pair{1, 1});
        CHECK(a.block_shape(0, 1) == std::pair{1, 2});
        CHECK(a.block_shape(0, 2) == std::pair{1, 3});
        CHECK(a.block_shape(1, 2) == std::pair{2, 3});
        CHECK(a.block_shape(2, 2) == std::pair{3, 3});
        CHECK(a.block_shape(2, 0) == std::pair{3, 1});
    }
}

TEST_CASE("every entry matches central finite differences of L") {
    std::mt19937_64 rng(909);
    for (const NamedLagrangian& t : test_lagrangians()) {
        INFO(t.name);
        const HessianMatrix a = build_hessian(t.lagrangian, t.spec);
        std::vector<JetCoordinate> coords;
        for (int r = 0; r < t.spec.dimension(); ++r) coords.push_back(t.spec.unrank(r));
        for (int rep = 0; rep < 5; ++rep) {
            const Point p = testing::random_point(rng, t.spec.n(), coords);
            for (int r = 0; r < a.dim(); ++r) {
                for (int c = r; c < a.dim(); ++c) {
                    const double sym = evaluate(a.entry(r, c), p);
                    const double num = testing::fd_second_partial(
                        t.lagrangian, coords[static_cast<std::size_t>(r)],
                        coords[static_cast<std::size_t>(c)], p, 1e-5);
                    CHECK(sym == Catch::Approx(num).margin(1e-6).epsilon(1e-4));
                }
            }
        }
    }
}

TEST_CASE("necessary sums collapse the diagonal super-blocks") {
    SECTION("L = u^2 + u_x^2 -> B = (2, 2)") {
        const JetSpec spec(1, 1, 1);
        const Expr u = Expr::jet(coord(1, {0})), ux = Expr::jet(coord(1, {1}));
        const NecessarySums sums =
            build_necessary_sums(build_hessian(add(powi(u, 2), powi(ux, 2)), spec));
        REQUIRE(sums.B.size() == 2);
        CHECK(sums.B[0].is_constant(2.0));
        CHECK(sums.B[1].is_constant(2.0));
    }

    SECTION("L = u_x^2 - u^2 -> B = (-2, 2)") {
        const JetSpec spec(1, 1, 1);
        const Expr u = Expr::jet(coord(1, {0})), ux = Expr::jet(coord(1, {1}));
        const NecessarySums sums =
            build_necessary_sums(build_hessian(sub(powi(ux, 2), powi(u, 2)), spec));
        CHECK(sums.B[0].is_constant(-2.0));
        CHECK(sums.B[1].is_constant(2.0));
    }

    SECTION("minimal surface at the zero jet -> B = (0, 2)") {
        const JetSpec spec(2, 1, 1);
        const Expr ux1 = Expr::jet(coord(1, {1, 0})), ux2 = Expr::jet(coord(1, {0, 1}));
        const Expr L = sqrt_of(add(Expr::constant(1.0), add(powi(ux1, 2), powi(ux2, 2))));
        const NecessarySums sums = build_necessary_sums(build_hessian(L, spec));
        Point zero;
        zero.indep = {0.3, 0.4};
        for (int r = 0; r < spec.dimension(); ++r) zero.jet[spec.unrank(r)] = 0.0;
        CHECK(evaluate(sums.B[0], zero) == 0.0);
        CHECK(evaluate(sums.B[1], zero) == Catch::Approx(2.0).margin(1e-12));

        // Cross-check against finite-difference second partials summed by hand.
        double fd_b1 = 0.0;
        for (const JetCoordinate& h : {coord(1, {1, 0}), coord(1, {0, 1})})
            for (const JetCoordinate& hp : {coord(1, {1, 0}), coord(1, {0, 1})})
                fd_b1 += testing::fd_second_partial(L, h, hp, zero, 1e-5);
        CHECK(evaluate(sums.B[1], zero) == Catch::Approx(fd_b1).margin(1e-6));
    }
}

TEST_CASE("evaluate_hessian_at: pointwise values and the zero Lagrangian") {
    const JetSpec spec(1, 1, 1);
    const Expr u = Expr::jet(coord(1, {0})), ux = Expr::jet(coord(1, {1}));

    // L = u * u_x^2 at (u = 1, u_x = 0): d2/du2 = 0, d2/du du_x = 2 u_x = 0,
    // d2/du_x2 = 2u = 2.
    const HessianMatrix a = build_hessian(mul(u, powi(ux, 2)), spec);
    Point p;
    p.indep = {0.0};
    p.jet[coord(1, {0})] = 1.0;
    p.jet[coord(1, {1})] = 0.0;
    const Matrix m = evaluate_hessian_at(a, p);
    CHECK(m(0, 0) == 0.0);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(1, 0) == 0.0);
    CHECK(m(1, 1) == 2.0);

    const HessianMatrix zero = build_hessian(Expr::constant(0.0), spec);
    const Matrix mz = evaluate_hessian_at(zero, p);
    CHECK(mz(0, 0) == 0.0);
    CHECK(mz(1, 1) == 0.0);
    CHECK(zero.structural_zeros() == 4);
}

TEST_CASE("property: symbolic symmetry of A") {
    std::mt19937_64 rng(7878);
    for (const NamedLagrangian& t : test_lagrangians()) {
        INFO(t.name);
        const HessianMatrix a = build_hessian(t.lagrangian, t.spec);
        std::vector<JetCoordinate> coords;
        for (int r = 0; r < t.spec.dimension(); ++r) coords.push_back(t.spec.unrank(r));
        for (int rep = 0; rep < 100; ++rep) {
            const Point p = testing::random_point(rng, t.spec.n(), coords);
            for (int r = 0; r < a.dim(); ++r)
                for (int c = r + 1; c < a.dim(); ++c)
                    CHECK(std::abs(evaluate(a.entry(r, c), p) -
                                   evaluate(a.entry(c, r), p)) <= 1e-10);
        }
    }
}

TEST_CASE("property: quadratic-form identity against second directional differences") {
    std::mt19937_64 rng(8181);
    const double h = 1e-4;
    for (const NamedLagrangian& t : test_lagrangians()) {
        INFO(t.name);
        const HessianMatrix a = build_hessian(t.lagrangian, t.spec);
        std::vector<JetCoordinate> coords;
        for (int r = 0; r < t.spec.dimension(); ++r) coords.push_back(t.spec.unrank(r));
        for (int rep = 0; rep < 10; ++rep) {
            const Point p = testing::random_point(rng, t.spec.n(), coords);
            std::vector<double> phi(coords.size());
            for (double& v : phi) v = testing::uniform(rng, -1.0, 1.0);

            const Matrix m = evaluate_hessian_at(a, p);
            double qf = 0.0;
            for (int r = 0; r < m.dim(); ++r)
                for (int c = 0; c < m.dim(); ++c)
                    qf += phi[static_cast<std::size_t>(r)] * m(r, c) *
                          phi[static_cast<std::size_t>(c)];

            Point hi = p, lo = p;
            for (std::size_t r = 0; r < coords.size(); ++r) {
                hi.jet[coords[r]] += h * phi[r];
                lo.jet[coords[r]] -= h * phi[r];
            }
            const double fd = (evaluate(t.lagrangian, hi) - 2.0 * evaluate(t.lagrangian, p) +
                               evaluate(t.lagrangian, lo)) /
                              (h * h);
            CHECK(qf == Catch::Approx(fd).margin(1e-6 + 100.0 * h * h));
        }
    }
}
