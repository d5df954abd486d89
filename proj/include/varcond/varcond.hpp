#pragma once

// Umbrella header: symbolic variational calculus (Euler-Lagrange systems,
// the jet-space Hessian block matrix A, second-order extremum tests) plus the
// parsers and numeric kernels behind the varcond CLI.

#include "varcond/analysis.hpp"
#include "varcond/errors.hpp"
#include "varcond/expr.hpp"
#include "varcond/hessian.hpp"
#include "varcond/jet.hpp"
#include "varcond/multi_index.hpp"
#include "varcond/numerics.hpp"
#include "varcond/parser.hpp"
#include "varcond/problem.hpp"
#include "varcond/report.hpp"
#include "varcond/varops.hpp"
