#pragma once

// The block matrix A of second partial derivatives of the Lagrangian with
// respect to all jet coordinates, its block view A^{jj'}_{kk'}, and the
// diagonal-block sums B_l used by the necessary condition.

#include "varcond/expr.hpp"
#include "varcond/jet.hpp"
#include "varcond/numerics.hpp"

#include <utility>
#include <vector>

namespace varcond {

/// Symbolic dim x dim matrix of second partials of L, indexed by coordinate
/// rank. Entries are simplified; structural zeros are the constant 0.
class HessianMatrix {
public:
    HessianMatrix(JetSpec spec, std::vector<Expr> entries)
        : spec_(std::move(spec)), dim_(spec_.dimension()), entries_(std::move(entries)) {}

    const JetSpec& spec() const noexcept { return spec_; }
    int dim() const noexcept { return dim_; }

    const Expr& entry(int row, int col) const {
        return entries_[static_cast<std::size_t>(row) * static_cast<std::size_t>(dim_) +
                        static_cast<std::size_t>(col)];
    }

    /// Entry of the block A^{j j'}_{k k'} at slot (h, h'). The block has
    /// shape p_k x p_{k'}.
    const Expr& block_entry(int j, int jp, int k, int kp, int h, int hp) const {
        return entry(spec_.rank(spec_.coordinate(j, k, h)),
                     spec_.rank(spec_.coordinate(jp, kp, hp)));
    }

    std::pair<int, int> block_shape(int k, int kp) const {
        return {order_size(spec_.n(), k), order_size(spec_.n(), kp)};
    }

    /// Number of entries that simplified to the constant 0.
    int structural_zeros() const {
        int z = 0;
        for (const Expr& e : entries_)
            if (e.is_constant(0.0)) ++z;
        return z;
    }

private:
    JetSpec spec_;
    int dim_;
    std::vector<Expr> entries_; // row-major
};

/// One expression per order l: B_l = sum over j, j', h, h' of the entries of
/// the (l, l) diagonal super-block of A.
struct NecessarySums {
    std::vector<Expr> B; // size s + 1
};

/// Differentiate L twice with respect to every pair of jet coordinates. Only
/// the upper triangle is computed; the lower is mirrored.
inline HessianMatrix build_hessian(const Expr& lagrangian, const JetSpec& spec) {
    const int dim = spec.dimension();
    std::vector<Expr> first(static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r)
        first[static_cast<std::size_t>(r)] = diff_wrt_coord(lagrangian, spec.unrank(r));

    std::vector<Expr> entries(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
    for (int r = 0; r < dim; ++r) {
        for (int c = r; c < dim; ++c) {
            Expr second = simplify(diff_wrt_coord(first[static_cast<std::size_t>(r)],
                                                  spec.unrank(c)));
            entries[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) +
                    static_cast<std::size_t>(c)] = second;
            entries[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) +
                    static_cast<std::size_t>(r)] = second;
        }
    }
    return HessianMatrix(spec, std::move(entries));
}

inline NecessarySums build_necessary_sums(const HessianMatrix& a) {
    const JetSpec& spec = a.spec();
    NecessarySums out;
    out.B.reserve(static_cast<std::size_t>(spec.s()) + 1);
    for (int l = 0; l <= spec.s(); ++l) {
        const int pl = order_size(spec.n(), l);
        Expr sum = Expr::constant(0.0);
        for (int j = 1; j <= spec.m(); ++j)
            for (int jp = 1; jp <= spec.m(); ++jp)
                for (int h = 0; h < pl; ++h)
                    for (int hp = 0; hp < pl; ++hp)
                        sum = add(sum, a.block_entry(j, jp, l, l, h, hp));
        out.B.push_back(simplify(sum));
    }
    return out;
}

/// Numeric value of A at a point. The result is symmetrized as (M + M^T) / 2
/// to absorb evaluation rounding.
inline Matrix evaluate_hessian_at(const HessianMatrix& a, const Point& p) {
    const int dim = a.dim();
    Matrix m(dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            m(r, c) = evaluate(a.entry(r, c), p);
    for (int r = 0; r < dim; ++r) {
        for (int c = r + 1; c < dim; ++c) {
            const double v = 0.5 * (m(r, c) + m(c, r));
            m(r, c) = v;
            m(c, r) = v;
        }
    }
    return m;
}

} // namespace varcond
