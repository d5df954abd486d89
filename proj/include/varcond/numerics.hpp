#pragma once

// Dependency-free numeric kernels: tensor-product Gauss-Legendre quadrature
// over a box, a cyclic-Jacobi symmetric eigensolver, and definiteness
// classification. Matrix sizes here are small (a few hundred at most), so
// everything is dense and exact-ish rather than clever.

#include "varcond/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace varcond {

/// Open box Omega = prod ]a_i, b_i[.
class BoxDomain {
public:
    explicit BoxDomain(std::vector<std::array<double, 2>> bounds)
        : bounds_(std::move(bounds)) {
        for (const auto& [a, b] : bounds_) {
            if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
                throw BadBounds("domain bounds must satisfy a < b and be finite");
        }
    }

    int n() const noexcept { return static_cast<int>(bounds_.size()); }
    double lower(int axis) const { return bounds_[static_cast<std::size_t>(axis - 1)][0]; }
    double upper(int axis) const { return bounds_[static_cast<std::size_t>(axis - 1)][1]; }
    const std::vector<std::array<double, 2>>& bounds() const noexcept { return bounds_; }

    double volume() const {
        double v = 1.0;
        for (const auto& [a, b] : bounds_) v *= b - a;
        return v;
    }

private:
    std::vector<std::array<double, 2>> bounds_;
};

/// Streaming pairwise (binary-counter) summation. The reduction tree depends
/// only on the number and order of added values, never on any worker count.
class PairwiseAccumulator {
public:
    void add(double v) {
        std::uint64_t c = count_++;
        std::size_t level = 0;
        while (c & 1u) {
            v += levels_[level];
            ++level;
            c >>= 1;
        }
        if (level == levels_.size())
            levels_.push_back(v);
        else
            levels_[level] = v;
    }

    double total() const {
        double sum = 0.0;
        std::uint64_t c = count_;
        for (std::size_t level = 0; level < levels_.size(); ++level, c >>= 1)
            if (c & 1u) sum += levels_[level];
        return sum;
    }

private:
    std::vector<double> levels_;
    std::uint64_t count_ = 0;
};

inline double pairwise_sum(const std::vector<double>& values) {
    PairwiseAccumulator acc;
    for (double v : values) acc.add(v);
    return acc.total();
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Exact (to roundoff) for polynomials of degree
/// <= 2*count - 1.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussRule gauss_legendre(int count) {
    if (count < 1) throw Error("quadrature needs at least one node");
    GaussRule rule;
    rule.nodes.assign(static_cast<std::size_t>(count), 0.0);
    rule.weights.assign(static_cast<std::size_t>(count), 0.0);
    const int half = (count + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= count; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_count(x), p0 = P_{count-1}(x)
            dp = count * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(count - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(count - 1 - i)] = w;
    }
    return rule;
}

/// Tensor-product quadrature grid over a box: node coordinates and combined
/// weights, enumerated with the first axis slowest.
struct QuadratureGrid {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
};

namespace detail {

inline std::int64_t checked_node_total(int n, int nodes_per_axis) {
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= nodes_per_axis;
        if (total > 10'000'000)
            throw TooManyNodes("quadrature grid exceeds 10^7 nodes");
    }
    return total;
}

} // namespace detail

inline QuadratureGrid box_quadrature_grid(const BoxDomain& domain, int nodes_per_axis) {
    if (nodes_per_axis < 2) throw Error("nodes_per_axis must be at least 2");
    const int n = domain.n();
    const std::int64_t total = detail::checked_node_total(n, nodes_per_axis);
    const GaussRule rule = gauss_legendre(nodes_per_axis);

    QuadratureGrid grid;
    grid.points.reserve(static_cast<std::size_t>(total));
    grid.weights.reserve(static_cast<std::size_t>(total));

    std::vector<int> odo(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t flat = 0; flat < total; ++flat) {
        double w = 1.0;
        for (int axis = 1; axis <= n; ++axis) {
            const std::size_t t = static_cast<std::size_t>(odo[static_cast<std::size_t>(axis - 1)]);
            const double a = domain.lower(axis), b = domain.upper(axis);
            const double mid = 0.5 * (a + b), halfwidth = 0.5 * (b - a);
            x[static_cast<std::size_t>(axis - 1)] = mid + halfwidth * rule.nodes[t];
            w *= halfwidth * rule.weights[t];
        }
        grid.points.push_back(x);
        grid.weights.push_back(w);
        for (int axis = n; axis >= 1; --axis) {
            int& t = odo[static_cast<std::size_t>(axis - 1)];
            if (++t < nodes_per_axis) break;
            t = 0;
        }
    }
    return grid;
}

/// Tensor-product Gauss-Legendre quadrature of f over the box. Exact for
/// polynomial integrands of per-axis degree <= 2*nodes_per_axis - 1.
template <class F>
double integrate_box(F&& f, const BoxDomain& domain, int nodes_per_axis) {
    const QuadratureGrid grid = box_quadrature_grid(domain, nodes_per_axis);
    PairwiseAccumulator acc;
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        acc.add(grid.weights[i] * f(grid.points[i]));
    return acc.total();
}

/// Small dense square matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int dim, double fill = 0.0)
        : dim_(dim), data_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), fill) {}

    int dim() const noexcept { return dim_; }
    double& operator()(int r, int c) {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) +
                     static_cast<std::size_t>(c)];
    }
    double operator()(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim_) +
                     static_cast<std::size_t>(c)];
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

private:
    int dim_ = 0;
    std::vector<double> data_;
};

/// All eigenvalues of a symmetric matrix in ascending order, via cyclic Jacobi
/// rotations. Sweeps run until the off-diagonal Frobenius norm drops below
/// 1e-12 times the Frobenius norm of the input.
inline std::vector<double> symmetric_eigenvalues(Matrix m) {
    const int dim = m.dim();
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            if (!std::isfinite(m(r, c)))
                throw NonFiniteEntry("matrix entry (" + std::to_string(r) + ", " +
                                     std::to_string(c) + ") is not finite");

    const double threshold = 1e-12 * m.frobenius_norm();
    auto off_norm = [&]() {
        double s = 0.0;
        for (int r = 0; r < dim; ++r)
            for (int c = r + 1; c < dim; ++c) s += 2.0 * m(r, c) * m(r, c);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_norm() > threshold; ++sweep) {
        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = m(p, p), aqq = m(q, q);
                m(p, p) = app - t * apq;
                m(q, q) = aqq + t * apq;
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                for (int r = 0; r < dim; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = m(r, p), arq = m(r, q);
                    m(r, p) = arp - s * (arq + tau * arp);
                    m(p, r) = m(r, p);
                    m(r, q) = arq + s * (arp - tau * arq);
                    m(q, r) = m(r, q);
                }
            }
        }
    }

    std::vector<double> eig(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) eig[static_cast<std::size_t>(r)] = m(r, r);
    std::sort(eig.begin(), eig.end());
    return eig;
}

enum class DefinitenessKind {
    PositiveDefinite,
    NegativeDefinite,
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
    Zero,
};

inline const char* to_string(DefinitenessKind k) {
    switch (k) {
        case DefinitenessKind::PositiveDefinite: return "PositiveDefinite";
        case DefinitenessKind::NegativeDefinite: return "NegativeDefinite";
        case DefinitenessKind::PositiveSemidefinite: return "PositiveSemidefinite";
        case DefinitenessKind::NegativeSemidefinite: return "NegativeSemidefinite";
        case DefinitenessKind::Indefinite: return "Indefinite";
        case DefinitenessKind::Zero: return "Zero";
    }
    return "?";
}

struct Definiteness {
    DefinitenessKind kind = DefinitenessKind::Zero;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Classify a symmetric matrix with a tolerance relative to its Frobenius
/// norm (absolute floor 1, so the zero matrix classifies as Zero).
inline Definiteness classify_definiteness(const Matrix& m, double tol) {
    if (!(tol > 0.0)) throw Error("definiteness tolerance must be positive");
    const std::vector<double> eig = symmetric_eigenvalues(m);
    Definiteness out;
    out.lambda_min = eig.front();
    out.lambda_max = eig.back();
    const double t = tol * std::max(1.0, m.frobenius_norm());
    if (std::abs(out.lambda_min) <= t && std::abs(out.lambda_max) <= t)
        out.kind = DefinitenessKind::Zero;
    else if (out.lambda_min > t)
        out.kind = DefinitenessKind::PositiveDefinite;
    else if (out.lambda_max < -t)
        out.kind = DefinitenessKind::NegativeDefinite;
    else if (out.lambda_min < -t && out.lambda_max > t)
        out.kind = DefinitenessKind::Indefinite;
    else if (out.lambda_min >= -t)
        out.kind = DefinitenessKind::PositiveSemidefinite;
    else
        out.kind = DefinitenessKind::NegativeSemidefinite;
    return out;
}

} // namespace varcond
