#pragma once

// Total derivative operator, variational (zeroth-Euler) derivative, and
// Euler-Lagrange system derivation.

#include "varcond/expr.hpp"
#include "varcond/jet.hpp"

#include <vector>

namespace varcond {

/// The m Euler-Lagrange residual expressions delta L / delta u^j and the
/// highest derivative order they contain (at most 2s).
struct EulerLagrangeSystem {
    std::vector<Expr> equations;
    int max_order = 0;
};

/// Total derivative D_{x^axis} e: the explicit x^axis partial plus the chain
/// contribution u^j_{k+e_axis} * de/du^j_k. The sum ranges over the jet
/// coordinates actually present in e; output order is order(e) + 1.
inline Expr total_derivative(const Expr& e, int axis, const JetSpec& spec) {
    if (axis < 1 || axis > spec.n())
        throw InvalidCoordinate("axis out of range for total derivative");
    Expr out = diff_wrt_indep(e, axis);
    for (const JetCoordinate& c : free_coordinates(e)) {
        const Expr partial = diff_wrt_coord(e, c);
        if (partial.is_constant(0.0)) continue;
        out = add(out, mul(Expr::jet(JetCoordinate{c.dep, c.idx.bumped(axis)}), partial));
    }
    return simplify(out);
}

/// Variational derivative delta e / delta u^dep =
/// sum_k (-1)^|k| D^k (de/du^dep_k), maximum output order 2s.
inline Expr euler_operator(const Expr& e, int dep, const JetSpec& spec) {
    if (dep < 1 || dep > spec.m())
        throw InvalidCoordinate("dependent index out of range for Euler operator");
    Expr out = Expr::constant(0.0);
    for (const JetCoordinate& c : free_coordinates(e)) {
        if (c.dep != dep) continue;
        Expr term = diff_wrt_coord(e, c);
        // Apply D_{x^1}^{k_1} ... D_{x^n}^{k_n}; the order of application does
        // not matter (total derivatives commute; asserted in tests).
        for (int axis = 1; axis <= spec.n(); ++axis)
            for (int r = 0; r < c.idx.count(axis); ++r)
                term = total_derivative(term, axis, spec);
        if (c.order() % 2 != 0) term = neg(term);
        out = add(out, term);
    }
    return simplify(out);
}

/// Euler-Lagrange residuals for every dependent variable.
inline EulerLagrangeSystem euler_lagrange_system(const Expr& lagrangian, const JetSpec& spec) {
    EulerLagrangeSystem sys;
    sys.equations.reserve(static_cast<std::size_t>(spec.m()));
    for (int dep = 1; dep <= spec.m(); ++dep) {
        sys.equations.push_back(euler_operator(lagrangian, dep, spec));
        sys.max_order = std::max(sys.max_order, expression_order(sys.equations.back()));
    }
    return sys;
}

} // namespace varcond
