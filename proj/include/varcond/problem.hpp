#pragma once

#include "varcond/expr.hpp"
#include "varcond/jet.hpp"
#include "varcond/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace varcond {

/// Numeric controls for classification; defaults match the problem-file
/// defaults (grid 9 per axis, 16 quadrature nodes, tol_pd 1e-9,
/// tol_residual 1e-7, seed 42).
struct NumericParams {
    std::vector<int> grid; // per-axis interior sample counts
    int quad_nodes = 16;
    double tol_pd = 1e-9;
    double tol_residual = 1e-7;
    std::uint64_t seed = 42;
};

/// A parsed variational problem: the jet-space geometry, the Lagrangian, the
/// box domain, the candidate extremal (expressions in x only) and numeric
/// controls.
struct Problem {
    JetSpec spec;
    Expr lagrangian;
    BoxDomain domain;
    std::vector<Expr> candidate;
    NumericParams numerics;
    std::vector<std::string> independent_names;
    std::vector<std::string> dependent_names;
};

} // namespace varcond
