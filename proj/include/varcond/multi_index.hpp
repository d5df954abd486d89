#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace varcond {

/// Derivative multi-index (k_1, ..., k_n): k_i counts how many times the
/// expression is differentiated along axis i. |k| = sum k_i is its order.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> counts) : counts_(std::move(counts)) {}

    /// The order-0 index over n axes.
    static MultiIndex zeros(int n) {
        return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0));
    }

    int size() const noexcept { return static_cast<int>(counts_.size()); }
    int order() const noexcept { return std::accumulate(counts_.begin(), counts_.end(), 0); }

    /// Count along `axis` (1-based).
    int count(int axis) const { return counts_[static_cast<std::size_t>(axis - 1)]; }
    int& count(int axis) { return counts_[static_cast<std::size_t>(axis - 1)]; }

    const std::vector<int>& counts() const noexcept { return counts_; }

    /// This index with one more derivative along `axis` (1-based).
    MultiIndex bumped(int axis) const {
        MultiIndex out = *this;
        ++out.count(axis);
        return out;
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;

    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        return a.counts_ < b.counts_;
    }

private:
    std::vector<int> counts_;
};

/// One jet-space coordinate u^j_(k): dependent index `dep` (1-based) plus a
/// derivative multi-index.
struct JetCoordinate {
    int dep = 1;
    MultiIndex idx;

    int order() const noexcept { return idx.order(); }

    friend bool operator==(const JetCoordinate& a, const JetCoordinate& b) = default;

    friend bool operator<(const JetCoordinate& a, const JetCoordinate& b) {
        if (a.dep != b.dep) return a.dep < b.dep;
        return a.idx < b.idx;
    }
};

/// Canonical spelling, e.g. u1_x1x1x2. Axis names sorted ascending, so mixed
/// partials have exactly one spelling.
inline std::string coordinate_name(const JetCoordinate& c) {
    std::string out = "u" + std::to_string(c.dep);
    if (c.order() == 0) return out;
    out += '_';
    for (int axis = 1; axis <= c.idx.size(); ++axis) {
        const std::string name = "x" + std::to_string(axis);
        for (int r = 0; r < c.idx.count(axis); ++r) out += name;
    }
    return out;
}

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& k) const noexcept {
        std::size_t h = 0x9e3779b97f4a7c15ull;
        for (int c : k.counts()) h = h * 1099511628211ull + static_cast<std::size_t>(c + 1);
        return h;
    }
};

struct JetCoordinateHash {
    std::size_t operator()(const JetCoordinate& c) const noexcept {
        return MultiIndexHash{}(c.idx) * 31u + static_cast<std::size_t>(c.dep);
    }
};

} // namespace varcond
