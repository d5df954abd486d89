#pragma once

// Jet-space bookkeeping for n independent variables, m dependent variables and
// derivative order s: per-order multi-index tables, the flat coordinate
// ordering (dependent index major, then order, then position within the
// order), and symbolic prolongation of candidate functions.

#include "varcond/errors.hpp"
#include "varcond/expr.hpp"
#include "varcond/multi_index.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace varcond {

inline std::int64_t binomial(int a, int b) {
    if (b < 0 || b > a) return 0;
    b = std::min(b, a - b);
    std::int64_t out = 1;
    for (int i = 1; i <= b; ++i) out = out * (a - b + i) / i;
    return out;
}

/// Number of distinct order-l partial derivatives of one dependent variable:
/// p_l = C(n+l-1, l).
inline int order_size(int n, int l) {
    return static_cast<int>(binomial(n + l - 1, l));
}

/// All order-l multi-indices over n axes. The list enumerates the
/// nondecreasing axis sequences of length l in lexicographic order, which
/// coincides with the recursive differentiate-and-deduplicate construction
/// (asserted in the tests).
inline std::vector<MultiIndex> enumerate_order(int n, int l) {
    std::vector<MultiIndex> out;
    MultiIndex cur = MultiIndex::zeros(n);
    auto rec = [&](auto&& self, int depth, int min_axis) -> void {
        if (depth == l) {
            out.push_back(cur);
            return;
        }
        for (int axis = min_axis; axis <= n; ++axis) {
            ++cur.count(axis);
            self(self, depth + 1, axis);
            --cur.count(axis);
        }
    };
    rec(rec, 0, 1);
    return out;
}

/// The (n, m, s) jet-space geometry. Immutable after construction; all lookup
/// tables are dense and precomputed.
class JetSpec {
public:
    JetSpec(int n, int m, int s) : n_(n), m_(m), s_(s) {
        if (n < 1 || m < 1 || s < 1)
            throw Error("jet space requires n, m, s >= 1");
        orders_.reserve(static_cast<std::size_t>(s) + 1);
        order_offset_.assign(static_cast<std::size_t>(s) + 2, 0);
        for (int l = 0; l <= s; ++l) {
            orders_.push_back(enumerate_order(n, l));
            order_offset_[static_cast<std::size_t>(l) + 1] =
                order_offset_[static_cast<std::size_t>(l)] +
                static_cast<int>(orders_.back().size());
            for (int h = 0; h < static_cast<int>(orders_.back().size()); ++h)
                position_.emplace(orders_.back()[static_cast<std::size_t>(h)],
                                  std::make_pair(l, h));
        }
        per_dep_ = order_offset_[static_cast<std::size_t>(s) + 1];
    }

    int n() const noexcept { return n_; }
    int m() const noexcept { return m_; }
    int s() const noexcept { return s_; }

    const std::vector<MultiIndex>& order_table(int l) const {
        return orders_[static_cast<std::size_t>(l)];
    }

    /// Coordinates per dependent variable: 1 + p_1 + ... + p_s = C(n+s, s).
    int per_dependent() const noexcept { return per_dep_; }

    /// Total coordinate count m * C(n+s, s).
    int dimension() const noexcept { return m_ * per_dep_; }

    /// Position (order l, slot h) of a multi-index within the per-order tables.
    std::pair<int, int> position(const MultiIndex& idx) const {
        auto it = position_.find(idx);
        if (it == position_.end())
            throw InvalidCoordinate("multi-index outside this jet space");
        return it->second;
    }

    JetCoordinate coordinate(int dep, int l, int h) const {
        if (dep < 1 || dep > m_ || l < 0 || l > s_)
            throw InvalidCoordinate("coordinate indices out of range");
        const auto& table = order_table(l);
        if (h < 0 || h >= static_cast<int>(table.size()))
            throw InvalidCoordinate("slot index out of range");
        return JetCoordinate{dep, table[static_cast<std::size_t>(h)]};
    }

    /// Flat index in the u^(s) tuple ordering: dependent major, then order,
    /// then slot. Bijective onto 0..dimension()-1.
    int rank(const JetCoordinate& c) const {
        if (c.dep < 1 || c.dep > m_)
            throw InvalidCoordinate("dependent index out of range");
        if (c.idx.size() != n_)
            throw InvalidCoordinate("multi-index has wrong axis count");
        const auto [l, h] = position(c.idx);
        return (c.dep - 1) * per_dep_ + order_offset_[static_cast<std::size_t>(l)] + h;
    }

    JetCoordinate unrank(int flat) const {
        if (flat < 0 || flat >= dimension())
            throw InvalidCoordinate("flat index out of range");
        const int dep = flat / per_dep_ + 1;
        int rest = flat % per_dep_;
        int l = 0;
        while (rest >= order_offset_[static_cast<std::size_t>(l) + 1]) ++l;
        const int h = rest - order_offset_[static_cast<std::size_t>(l)];
        return coordinate(dep, l, h);
    }

private:
    int n_, m_, s_;
    int per_dep_ = 0;
    std::vector<std::vector<MultiIndex>> orders_;
    std::vector<int> order_offset_; // offset of order l within one dependent band
    std::unordered_map<MultiIndex, std::pair<int, int>, MultiIndexHash> position_;
};

/// Total coordinate count of the jet space; equals m * C(n+s, s).
inline int jet_dimension(const JetSpec& spec) {
    return spec.dimension();
}

/// All partial derivatives of the candidate functions up to order s, as
/// expressions in x. candidate[j-1] is u^j and must not mention jet
/// coordinates.
inline JetBindings prolong_candidate(const JetSpec& spec, std::span<const Expr> candidate) {
    if (static_cast<int>(candidate.size()) != spec.m())
        throw InvalidCoordinate("expected one candidate expression per dependent variable");
    for (const Expr& e : candidate)
        if (!free_coordinates(e).empty())
            throw InvalidCoordinate("candidate expressions must not contain jet coordinates");

    JetBindings out;
    out.reserve(static_cast<std::size_t>(spec.dimension()));
    for (int dep = 1; dep <= spec.m(); ++dep) {
        out.emplace(spec.coordinate(dep, 0, 0), candidate[static_cast<std::size_t>(dep - 1)]);
        for (int l = 1; l <= spec.s(); ++l) {
            for (const MultiIndex& idx : spec.order_table(l)) {
                int axis = 1;
                while (idx.count(axis) == 0) ++axis;
                MultiIndex parent = idx;
                --parent.count(axis);
                const Expr& base = out.at(JetCoordinate{dep, parent});
                out.emplace(JetCoordinate{dep, idx},
                            simplify(diff_wrt_indep(base, axis)));
            }
        }
    }
    return out;
}

inline JetBindings prolong_candidate(const JetSpec& spec, const std::vector<Expr>& candidate) {
    return prolong_candidate(spec, std::span<const Expr>(candidate));
}

} // namespace varcond
