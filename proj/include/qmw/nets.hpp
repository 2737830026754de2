#pragma once

// Nested reference dyadic points. Level k holds a maximal delta^k-separated
// set X^k, with X^k a subset of X^{k+1}. Levels run from k_min (a single
// point, so the coarsest spline space is the constants) to k_max (all of X).
//
// Storage convention: the points of X^k form a prefix of X^{k+1}, so the
// index alpha of x^k_alpha is also its index at every finer level, and
// Y^k = X^{k+1} \ X^k is the tail of level k+1.

#include "qmw/space.hpp"

#include <string>
#include <vector>

namespace qmw {

enum class OrderPolicy { input_order, farthest_first };

std::optional<OrderPolicy> parse_order_policy(std::string_view name);
std::string_view to_string(OrderPolicy policy);

class NestedNets {
public:
    NestedNets() = default;

    /// Wraps explicit levels (coarsest first). Nested inputs are reordered into
    /// prefix form; non-nested inputs are kept verbatim so verify_nets can flag them.
    static NestedNets from_levels(double delta, int k_min, std::vector<std::vector<Index>> levels);

    double delta() const noexcept { return delta_; }
    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_min_ + static_cast<int>(levels_.size()) - 1; }
    int num_levels() const noexcept { return static_cast<int>(levels_.size()); }
    bool has_level(int k) const noexcept { return k >= k_min() && k <= k_max(); }

    /// delta^k
    double scale(int k) const;

    const std::vector<Index>& level(int k) const;
    /// Y^k = X^{k+1} \ X^k for k_min <= k < k_max.
    const std::vector<Index>& diff(int k) const;
    /// Position of Y^k's first point inside level k+1 (== |X^k| in prefix form).
    Index diff_offset(int k) const;

    const std::vector<std::vector<Index>>& levels() const noexcept { return levels_; }

private:
    double delta_ = 0.5;
    int k_min_ = 0;
    std::vector<std::vector<Index>> levels_;
    std::vector<std::vector<Index>> diffs_;
    std::vector<Index> offsets_;
};

/// Throws Error{BadDelta} unless 0 < delta < 1.
NestedNets build_nets(const QuasiMetricSpace& space, double delta, OrderPolicy policy = OrderPolicy::input_order);

struct NetsLevelReport {
    int k = 0;
    Index size = 0;
    double separation_ratio = 0.0; ///< min pairwise d / delta^k (must be >= 1)
    double density_ratio = 0.0;    ///< max_x min_alpha d / delta^k (must be < 2 A0)
    bool nested = true;            ///< X^k subset of X^{k+1}
};

struct NetsReport {
    std::vector<NetsLevelReport> levels;
    bool coarsest_single = true;
    bool finest_complete = true;
    bool diff_count_ok = true;
    std::vector<std::string> violations;
    bool ok() const noexcept { return violations.empty(); }
};

NetsReport verify_nets(const QuasiMetricSpace& space, const NestedNets& nets);

} // namespace qmw
