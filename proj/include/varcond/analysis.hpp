#pragma once

// End-to-end classification of a candidate extremal: Euler-Lagrange residuals
// on a sample grid, pointwise definiteness of A (sufficient condition),
// diagonal-block sums B_l (necessary condition), and an independent
// finite-difference second-variation oracle.

#include "varcond/hessian.hpp"
#include "varcond/jet.hpp"
#include "varcond/numerics.hpp"
#include "varcond/problem.hpp"
#include "varcond/varops.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace varcond {

enum class SufficientVerdict { LocalMinEvidence, LocalMaxEvidence, Inconclusive };
enum class NecessaryVerdict { MinNecessaryHolds, MaxNecessaryHolds, BothFail, BothHoldDegenerate };

inline const char* to_string(SufficientVerdict v) {
    switch (v) {
        case SufficientVerdict::LocalMinEvidence: return "LocalMinEvidence";
        case SufficientVerdict::LocalMaxEvidence: return "LocalMaxEvidence";
        case SufficientVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

inline const char* to_string(NecessaryVerdict v) {
    switch (v) {
        case NecessaryVerdict::MinNecessaryHolds: return "MinNecessaryHolds";
        case NecessaryVerdict::MaxNecessaryHolds: return "MaxNecessaryHolds";
        case NecessaryVerdict::BothFail: return "BothFail";
        case NecessaryVerdict::BothHoldDegenerate: return "BothHoldDegenerate";
    }
    return "?";
}

struct GridPointData {
    std::vector<double> x;
    Definiteness definiteness;
    std::vector<double> B; // B_0 .. B_s
};

struct OracleTrial {
    double fd_second = 0.0;      // (F(h) - 2F(0) + F(-h)) / h^2
    double quadratic_form = 0.0; // integral of phi^(s) . A . phi^(s)
    double rel_gap = 0.0;
    double first_variation = 0.0; // centered F'(0) with boundary-vanishing phi
};

struct OracleRecord {
    std::vector<OracleTrial> trials;
    // From the trial with the largest relative gap:
    double fd_second = 0.0;
    double quadratic_form = 0.0;
    double rel_gap = 0.0;
    double first_variation_max = 0.0;
};

struct SufficientResult {
    SufficientVerdict verdict = SufficientVerdict::Inconclusive;
    bool not_critical = false;
    std::vector<GridPointData> points;
};

struct NecessaryResult {
    std::optional<NecessaryVerdict> verdict; // empty when skipped (not critical)
    bool not_critical = false;
    std::vector<GridPointData> points;
};

/// Everything the report emitters need to echo about the problem.
struct ProblemSummary {
    std::vector<std::string> independent;
    std::vector<std::string> dependent;
    int order = 1;
    std::string lagrangian;
    std::vector<std::array<double, 2>> domain;
    std::vector<std::string> candidate;
    NumericParams numerics;
};

struct ClassificationReport {
    ProblemSummary problem;
    std::vector<double> residual_max; // per dependent variable
    bool critical = false;
    std::vector<GridPointData> points;
    SufficientVerdict sufficient = SufficientVerdict::Inconclusive;
    std::optional<NecessaryVerdict> necessary; // empty when skipped
    std::optional<OracleRecord> oracle;
};

namespace detail {

inline unsigned worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned cap = hw;
    if (const char* env = std::getenv("VARCOND_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<unsigned>(std::min<long>(v, 256));
    }
    return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

/// Static-chunked parallel loop. Results must be written by index so the
/// outcome is identical for every worker count. The lowest-index exception
/// wins, which keeps failures deterministic too.
template <class F>
void parallel_for(std::size_t count, F&& f) {
    const unsigned workers = worker_count(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::mutex err_mutex;
    std::size_t err_index = count;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(count, static_cast<std::size_t>(w) * chunk);
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, begin, end]() {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (i < err_index) {
                        err_index = i;
                        err = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline std::string format_point(std::span<const double> x) {
    std::string out = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ", ";
        out += format_double(x[i]);
    }
    out += ")";
    return out;
}

} // namespace detail

/// Interior sample grid: cell midpoints x_i = a_i + (t + 1/2)(b_i - a_i)/g_i,
/// enumerated with the first axis slowest. Never touches the boundary.
inline std::vector<std::vector<double>> sample_grid(const Problem& p) {
    const int n = p.spec.n();
    std::size_t total = 1;
    for (int g : p.numerics.grid) total *= static_cast<std::size_t>(g);
    std::vector<std::vector<double>> points;
    points.reserve(total);
    std::vector<int> odo(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int axis = 1; axis <= n; ++axis) {
            const int g = p.numerics.grid[static_cast<std::size_t>(axis - 1)];
            const double a = p.domain.lower(axis), b = p.domain.upper(axis);
            x[static_cast<std::size_t>(axis - 1)] =
                a + (odo[static_cast<std::size_t>(axis - 1)] + 0.5) * (b - a) / g;
        }
        points.push_back(x);
        for (int axis = n; axis >= 1; --axis) {
            int& t = odo[static_cast<std::size_t>(axis - 1)];
            if (++t < p.numerics.grid[static_cast<std::size_t>(axis - 1)]) break;
            t = 0;
        }
    }
    return points;
}

/// Max absolute Euler-Lagrange residual of the candidate over the sample
/// grid, one value per dependent variable.
inline std::vector<double> check_critical(const Problem& p) {
    const JetSpec extended(p.spec.n(), p.spec.m(), 2 * p.spec.s());
    const JetBindings bindings = prolong_candidate(extended, p.candidate);
    const EulerLagrangeSystem sys = euler_lagrange_system(p.lagrangian, p.spec);

    std::vector<Expr> residuals;
    residuals.reserve(sys.equations.size());
    for (const Expr& eq : sys.equations) residuals.push_back(simplify(substitute(eq, bindings)));

    const std::vector<std::vector<double>> grid = sample_grid(p);
    std::vector<double> out(residuals.size(), 0.0);
    std::vector<std::vector<double>> per_point(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        Point pt;
        pt.indep = grid[i];
        std::vector<double> vals;
        vals.reserve(residuals.size());
        try {
            for (const Expr& r : residuals) vals.push_back(std::abs(evaluate(r, pt)));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " at grid point " +
                              detail::format_point(grid[i]));
        }
        per_point[i] = std::move(vals);
    });
    for (const auto& vals : per_point)
        for (std::size_t j = 0; j < vals.size(); ++j)
            out[j] = std::max(out[j], vals[j]);
    return out;
}

namespace detail {

/// Definiteness of A and the B_l values at every grid point.
inline std::vector<GridPointData> evaluate_grid(const Problem& p) {
    const JetBindings prolonged = prolong_candidate(p.spec, p.candidate);
    const HessianMatrix a = build_hessian(p.lagrangian, p.spec);
    const NecessarySums sums = build_necessary_sums(a);
    const int dim = p.spec.dimension();

    std::vector<JetCoordinate> coords;
    std::vector<Expr> cand_exprs;
    coords.reserve(static_cast<std::size_t>(dim));
    cand_exprs.reserve(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) {
        coords.push_back(p.spec.unrank(r));
        cand_exprs.push_back(prolonged.at(coords.back()));
    }

    const std::vector<std::vector<double>> grid = sample_grid(p);
    std::vector<GridPointData> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        Point xonly;
        xonly.indep = grid[i];
        Point pt;
        pt.indep = grid[i];
        try {
            for (int r = 0; r < dim; ++r)
                pt.jet.emplace(coords[static_cast<std::size_t>(r)],
                               evaluate(cand_exprs[static_cast<std::size_t>(r)], xonly));
            GridPointData data;
            data.x = grid[i];
            data.definiteness =
                classify_definiteness(evaluate_hessian_at(a, pt), p.numerics.tol_pd);
            data.B.reserve(sums.B.size());
            for (const Expr& b : sums.B) data.B.push_back(evaluate(b, pt));
            out[i] = std::move(data);
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " at grid point " +
                              format_point(grid[i]));
        }
    });
    return out;
}

inline SufficientVerdict sufficient_from_points(const std::vector<GridPointData>& points) {
    bool all_pd = true, all_nd = true;
    for (const GridPointData& pt : points) {
        all_pd = all_pd && pt.definiteness.kind == DefinitenessKind::PositiveDefinite;
        all_nd = all_nd && pt.definiteness.kind == DefinitenessKind::NegativeDefinite;
    }
    if (!points.empty() && all_pd) return SufficientVerdict::LocalMinEvidence;
    if (!points.empty() && all_nd) return SufficientVerdict::LocalMaxEvidence;
    return SufficientVerdict::Inconclusive;
}

inline NecessaryVerdict necessary_from_points(const std::vector<GridPointData>& points,
                                              double tol) {
    bool min_holds = true, max_holds = true;
    for (const GridPointData& pt : points) {
        for (double b : pt.B) {
            min_holds = min_holds && b >= -tol;
            max_holds = max_holds && b <= tol;
        }
    }
    if (min_holds && max_holds) return NecessaryVerdict::BothHoldDegenerate;
    if (min_holds) return NecessaryVerdict::MinNecessaryHolds;
    if (max_holds) return NecessaryVerdict::MaxNecessaryHolds;
    return NecessaryVerdict::BothFail;
}

inline bool is_critical(const std::vector<double>& residuals, double tol) {
    for (double r : residuals)
        if (!(r <= tol)) return false;
    return true;
}

} // namespace detail

/// Sufficient-condition check: classify A(x, candidate jet) at every grid point.
/// Requires the candidate to be critical; otherwise Inconclusive with the
/// not_critical flag set and no points evaluated.
inline SufficientResult sufficient_verdict(const Problem& p) {
    SufficientResult out;
    if (!detail::is_critical(check_critical(p), p.numerics.tol_residual)) {
        out.not_critical = true;
        return out;
    }
    out.points = detail::evaluate_grid(p);
    out.verdict = detail::sufficient_from_points(out.points);
    return out;
}

/// Necessary-condition check: signs of B_l(x) for l = 0..s at every grid point.
inline NecessaryResult necessary_verdict(const Problem& p) {
    NecessaryResult out;
    if (!detail::is_critical(check_critical(p), p.numerics.tol_residual)) {
        out.not_critical = true;
        return out;
    }
    out.points = detail::evaluate_grid(p);
    out.verdict = detail::necessary_from_points(out.points, p.numerics.tol_pd);
    return out;
}

// ---------------------------------------------------------------------------
// Second-variation oracle
// ---------------------------------------------------------------------------

namespace detail {

struct OracleContext {
    QuadratureGrid grid;
    std::vector<JetCoordinate> coords;        // by rank
    std::vector<std::vector<double>> cand_jet; // per node, by rank
    std::vector<Matrix> hessian_at;            // per node
    Expr weight;                               // prod ((x_i - a_i)(b_i - x_i))^s
};

inline OracleContext make_oracle_context(const Problem& p) {
    OracleContext ctx;
    ctx.grid = box_quadrature_grid(p.domain, p.numerics.quad_nodes);
    const int dim = p.spec.dimension();
    ctx.coords.reserve(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) ctx.coords.push_back(p.spec.unrank(r));

    const JetBindings prolonged = prolong_candidate(p.spec, p.candidate);
    std::vector<Expr> cand_exprs;
    cand_exprs.reserve(static_cast<std::size_t>(dim));
    for (const JetCoordinate& c : ctx.coords) cand_exprs.push_back(prolonged.at(c));
    const HessianMatrix a = build_hessian(p.lagrangian, p.spec);

    const std::size_t nodes = ctx.grid.points.size();
    ctx.cand_jet.resize(nodes);
    ctx.hessian_at.resize(nodes);
    parallel_for(nodes, [&](std::size_t i) {
        Point xonly;
        xonly.indep = ctx.grid.points[i];
        std::vector<double> jet(static_cast<std::size_t>(dim), 0.0);
        Point pt;
        pt.indep = ctx.grid.points[i];
        for (int r = 0; r < dim; ++r) {
            jet[static_cast<std::size_t>(r)] =
                evaluate(cand_exprs[static_cast<std::size_t>(r)], xonly);
            pt.jet.emplace(ctx.coords[static_cast<std::size_t>(r)],
                           jet[static_cast<std::size_t>(r)]);
        }
        ctx.cand_jet[i] = std::move(jet);
        ctx.hessian_at[i] = evaluate_hessian_at(a, pt);
    });

    Expr w = Expr::constant(1.0);
    for (int axis = 1; axis <= p.spec.n(); ++axis) {
        const Expr x = Expr::indep(axis);
        const Expr cell = mul(sub(x, Expr::constant(p.domain.lower(axis))),
                              sub(Expr::constant(p.domain.upper(axis)), x));
        w = mul(w, powi(cell, p.spec.s()));
    }
    ctx.weight = simplify(w);
    return ctx;
}

/// Jet values of the perturbation at every quadrature node, by rank.
inline std::vector<std::vector<double>> perturbation_jets(const Problem& p,
                                                          const OracleContext& ctx,
                                                          std::span<const Expr> phi) {
    const JetBindings prolonged = prolong_candidate(p.spec, phi);
    const int dim = p.spec.dimension();
    std::vector<Expr> exprs;
    exprs.reserve(static_cast<std::size_t>(dim));
    for (const JetCoordinate& c : ctx.coords) exprs.push_back(prolonged.at(c));

    std::vector<std::vector<double>> out(ctx.grid.points.size());
    parallel_for(out.size(), [&](std::size_t i) {
        Point xonly;
        xonly.indep = ctx.grid.points[i];
        std::vector<double> jet(static_cast<std::size_t>(dim), 0.0);
        for (int r = 0; r < dim; ++r)
            jet[static_cast<std::size_t>(r)] =
                evaluate(exprs[static_cast<std::size_t>(r)], xonly);
        out[i] = std::move(jet);
    });
    return out;
}

/// F(eps) = integral of L(x, candidate jet + eps * phi jet).
inline double perturbed_functional(const Problem& p, const OracleContext& ctx,
                                   const std::vector<std::vector<double>>& phi_jet,
                                   double eps) {
    PairwiseAccumulator acc;
    const int dim = p.spec.dimension();
    for (std::size_t i = 0; i < ctx.grid.points.size(); ++i) {
        Point pt;
        pt.indep = ctx.grid.points[i];
        for (int r = 0; r < dim; ++r)
            pt.jet.emplace(ctx.coords[static_cast<std::size_t>(r)],
                           ctx.cand_jet[i][static_cast<std::size_t>(r)] +
                               eps * phi_jet[i][static_cast<std::size_t>(r)]);
        acc.add(ctx.grid.weights[i] * evaluate(p.lagrangian, pt));
    }
    return acc.total();
}

inline double quadratic_form_integral(const Problem& p, const OracleContext& ctx,
                                      const std::vector<std::vector<double>>& phi_jet) {
    PairwiseAccumulator acc;
    const int dim = p.spec.dimension();
    for (std::size_t i = 0; i < ctx.grid.points.size(); ++i) {
        const Matrix& m = ctx.hessian_at[i];
        const std::vector<double>& v = phi_jet[i];
        double q = 0.0;
        for (int r = 0; r < dim; ++r) {
            double row = 0.0;
            for (int c = 0; c < dim; ++c)
                row += m(r, c) * v[static_cast<std::size_t>(c)];
            q += v[static_cast<std::size_t>(r)] * row;
        }
        acc.add(ctx.grid.weights[i] * q);
    }
    return acc.total();
}

inline OracleTrial run_trial(const Problem& p, const OracleContext& ctx,
                             std::span<const Expr> phi, double h) {
    OracleTrial trial;
    const auto phi_jet = perturbation_jets(p, ctx, phi);
    const double f_plus = perturbed_functional(p, ctx, phi_jet, h);
    const double f_zero = perturbed_functional(p, ctx, phi_jet, 0.0);
    const double f_minus = perturbed_functional(p, ctx, phi_jet, -h);
    trial.fd_second = (f_plus - 2.0 * f_zero + f_minus) / (h * h);
    trial.quadratic_form = quadratic_form_integral(p, ctx, phi_jet);
    trial.rel_gap = std::abs(trial.fd_second - trial.quadratic_form) /
                    std::max(1.0, std::abs(trial.quadratic_form));

    std::vector<Expr> weighted;
    weighted.reserve(phi.size());
    for (const Expr& component : phi) weighted.push_back(simplify(mul(component, ctx.weight)));
    const auto weighted_jet = perturbation_jets(p, ctx, weighted);
    const double fw_plus = perturbed_functional(p, ctx, weighted_jet, h);
    const double fw_minus = perturbed_functional(p, ctx, weighted_jet, -h);
    trial.first_variation = (fw_plus - fw_minus) / (2.0 * h);
    return trial;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Tensor polynomial of per-axis degree <= 3 with coefficients uniform in
/// [-1, 1]. Coefficient draw order is fixed (axis-1 exponent slowest).
inline Expr random_perturbation(std::mt19937_64& rng, int n) {
    Expr out = Expr::constant(0.0);
    std::vector<int> alpha(static_cast<std::size_t>(n), 0);
    for (;;) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        Expr term = Expr::constant(2.0 * u - 1.0);
        for (int axis = 1; axis <= n; ++axis)
            term = mul(term, powi(Expr::indep(axis), alpha[static_cast<std::size_t>(axis - 1)]));
        out = add(out, term);
        int axis = n;
        for (; axis >= 1; --axis) {
            int& a = alpha[static_cast<std::size_t>(axis - 1)];
            if (++a <= 3) break;
            a = 0;
        }
        if (axis == 0) break;
    }
    return simplify(out);
}

} // namespace detail

/// One oracle trial with a caller-supplied perturbation (one expression in x
/// per dependent variable).
inline OracleTrial run_second_variation_trial(const Problem& p, std::span<const Expr> phi,
                                              double h = 1e-4) {
    const detail::OracleContext ctx = detail::make_oracle_context(p);
    return detail::run_trial(p, ctx, phi, h);
}

/// Seeded random-perturbation trials. Each trial draws its generator
/// independently from (seed, trial index), so the trial count does not
/// change earlier trials.
inline OracleRecord second_variation_oracle(const Problem& p, int trials) {
    const detail::OracleContext ctx = detail::make_oracle_context(p);
    OracleRecord record;
    record.trials.reserve(static_cast<std::size_t>(std::max(trials, 0)));
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(detail::splitmix64(p.numerics.seed ^
                                               (0x9e3779b97f4a7c15ull *
                                                static_cast<std::uint64_t>(t + 1))));
        std::vector<Expr> phi;
        phi.reserve(static_cast<std::size_t>(p.spec.m()));
        for (int j = 0; j < p.spec.m(); ++j)
            phi.push_back(detail::random_perturbation(rng, p.spec.n()));
        record.trials.push_back(detail::run_trial(p, ctx, phi, 1e-4));
    }
    for (const OracleTrial& trial : record.trials) {
        if (trial.rel_gap >= record.rel_gap) {
            record.rel_gap = trial.rel_gap;
            record.fd_second = trial.fd_second;
            record.quadratic_form = trial.quadratic_form;
        }
        record.first_variation_max =
            std::max(record.first_variation_max, std::abs(trial.first_variation));
    }
    return record;
}

/// Full pipeline: criticality gate, sufficient and necessary verdicts, and
/// optionally the second-variation oracle.
inline ClassificationReport classify(const Problem& p, bool with_oracle = false,
                                     int trials = 8) {
    ClassificationReport report;
    report.problem.independent = p.independent_names;
    report.problem.dependent = p.dependent_names;
    report.problem.order = p.spec.s();
    report.problem.lagrangian = to_string(p.lagrangian);
    report.problem.domain = p.domain.bounds();
    for (const Expr& c : p.candidate) report.problem.candidate.push_back(to_string(c));
    report.problem.numerics = p.numerics;

    report.residual_max = check_critical(p);
    report.critical = detail::is_critical(report.residual_max, p.numerics.tol_residual);
    if (report.critical) {
        report.points = detail::evaluate_grid(p);
        report.sufficient = detail::sufficient_from_points(report.points);
        report.necessary = detail::necessary_from_points(report.points, p.numerics.tol_pd);
    }
    if (with_oracle) report.oracle = second_variation_oracle(p, trials);
    return report;
}

} // namespace varcond
