#include "qmw/nets.hpp"

#include "qmw/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace qmw {

std::optional<OrderPolicy> parse_order_policy(std::string_view name)
{
    if (name == "input_order")
        return OrderPolicy::input_order;
    if (name == "farthest_first")
        return OrderPolicy::farthest_first;
    return std::nullopt;
}

std::string_view to_string(OrderPolicy policy)
{
    return policy == OrderPolicy::input_order ? "input_order" : "farthest_first";
}

namespace {

bool is_prefix(const std::vector<Index>& a, const std::vector<Index>& b)
{
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// Grow `chosen` to a maximal r-separated subset of `candidates`.
void extend_separated(const QuasiMetricSpace& space, std::vector<Index>& chosen,
                      const std::vector<Index>& candidates, double r, OrderPolicy policy)
{
    std::vector<double> gap(candidates.size(), std::numeric_limits<double>::infinity());
    std::vector<char> taken(candidates.size(), 0);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        for (Index p : chosen) {
            gap[c] = std::min(gap[c], space.d(candidates[c], p));
            if (candidates[c] == p)
                taken[c] = 1;
        }
    }
    auto add = [&](std::size_t c) {
        chosen.push_back(candidates[c]);
        taken[c] = 1;
        for (std::size_t o = 0; o < candidates.size(); ++o)
            gap[o] = std::min(gap[o], space.d(candidates[o], candidates[c]));
    };

    if (policy == OrderPolicy::input_order) {
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if (!taken[c] && gap[c] >= r)
                add(c);
        return;
    }
    for (;;) {
        std::size_t best = candidates.size();
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (taken[c] || gap[c] < r)
                continue;
            if (best == candidates.size() || gap[c] > gap[best])
                best = c;
        }
        if (best == candidates.size())
            return;
        add(best);
    }
}

} // namespace

NestedNets NestedNets::from_levels(double delta, int k_min, std::vector<std::vector<Index>> levels)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::BadDelta, "delta must lie in (0, 1)");
    if (levels.empty())
        throw Error(ErrorKind::BadFormat, "nets need at least one level");

    bool nested = true;
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        std::set<Index> finer(levels[l + 1].begin(), levels[l + 1].end());
        for (Index p : levels[l])
            nested = nested && finer.count(p) > 0;
    }
    if (nested) {
        for (std::size_t l = 1; l < levels.size(); ++l) {
            if (is_prefix(levels[l - 1], levels[l]))
                continue;
            std::set<Index> coarse(levels[l - 1].begin(), levels[l - 1].end());
            std::vector<Index> reordered = levels[l - 1];
            for (Index p : levels[l])
                if (!coarse.count(p))
                    reordered.push_back(p);
            levels[l] = std::move(reordered);
        }
    }

    NestedNets nets;
    nets.delta_ = delta;
    nets.k_min_ = k_min;
    nets.levels_ = std::move(levels);
    for (std::size_t l = 0; l + 1 < nets.levels_.size(); ++l) {
        const auto& coarse = nets.levels_[l];
        const auto& fine = nets.levels_[l + 1];
        if (is_prefix(coarse, fine)) {
            nets.diffs_.emplace_back(fine.begin() + static_cast<std::ptrdiff_t>(coarse.size()), fine.end());
            nets.offsets_.push_back(static_cast<Index>(coarse.size()));
        } else {
            std::set<Index> c(coarse.begin(), coarse.end());
            std::vector<Index> d;
            for (Index p : fine)
                if (!c.count(p))
                    d.push_back(p);
            nets.diffs_.push_back(std::move(d));
            nets.offsets_.push_back(-1);
        }
    }
    return nets;
}

double NestedNets::scale(int k) const { return std::pow(delta_, k); }

const std::vector<Index>& NestedNets::level(int k) const
{
    if (!has_level(k))
        throw Error(ErrorKind::BadParams, "level " + std::to_string(k) + " out of range");
    return levels_[static_cast<std::size_t>(k - k_min_)];
}

const std::vector<Index>& NestedNets::diff(int k) const
{
    if (k < k_min() || k >= k_max())
        throw Error(ErrorKind::BadParams, "difference set " + std::to_string(k) + " out of range");
    return diffs_[static_cast<std::size_t>(k - k_min_)];
}

Index NestedNets::diff_offset(int k) const
{
    if (k < k_min() || k >= k_max())
        throw Error(ErrorKind::BadParams, "difference set " + std::to_string(k) + " out of range");
    return offsets_[static_cast<std::size_t>(k - k_min_)];
}

NestedNets build_nets(const QuasiMetricSpace& space, double delta, OrderPolicy policy)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::BadDelta, "delta must lie in (0, 1), got " + std::to_string(delta));
    const Index n = space.size();
    if (n == 1)
        return NestedNets::from_levels(delta, 0, {{0}});

    // Finest level: smallest k with delta^k <= minsep, where X^k = X.
    const double minsep = space.minsep();
    int k_max = static_cast<int>(std::ceil(std::log(minsep) / std::log(delta)));
    while (std::pow(delta, k_max) > minsep)
        ++k_max;
    while (std::pow(delta, k_max - 1) <= minsep)
        --k_max;

    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        all[static_cast<std::size_t>(i)] = i;

    // X^0: maximal 1-separated subset of X.
    std::vector<Index> level0;
    extend_separated(space, level0, all, 1.0, policy);

    // Finer levels extend X^0 inside X; coarser levels thin X^0 inside the previous level.
    std::vector<std::vector<Index>> finer{level0};
    for (int k = 1; k <= k_max; ++k) {
        std::vector<Index> next = finer.back();
        extend_separated(space, next, all, std::pow(delta, k), policy);
        finer.push_back(std::move(next));
    }
    std::vector<std::vector<Index>> coarser;
    for (int k = -1; (coarser.empty() ? finer.front() : coarser.back()).size() > 1; --k) {
        const auto& prev = coarser.empty() ? finer.front() : coarser.back();
        std::vector<Index> next;
        extend_separated(space, next, prev, std::pow(delta, k), policy);
        coarser.push_back(std::move(next));
    }

    // Assemble coarse-to-fine: levels k = -|coarser| .. max(0, k_max).
    std::vector<std::vector<Index>> levels(coarser.rbegin(), coarser.rend());
    int k_low = -static_cast<int>(coarser.size());
    for (auto& l : finer)
        levels.push_back(std::move(l));

    // Trim to [k_min, k_max]: k_min is the finest single-point level.
    int first = 0;
    while (first + 1 < static_cast<int>(levels.size()) && levels[static_cast<std::size_t>(first + 1)].size() == 1)
        ++first;
    const int last = k_max - k_low;
    if (last < first)
        throw Error(ErrorKind::BadParams, "level range is empty");
    std::vector<std::vector<Index>> kept(levels.begin() + first, levels.begin() + last + 1);
    // Level k_max may lie below 0; it is then all of X already.
    return NestedNets::from_levels(delta, k_low + first, std::move(kept));
}

NetsReport verify_nets(const QuasiMetricSpace& space, const NestedNets& nets)
{
    NetsReport report;
    const double two_a0 = 2.0 * space.a0();
    std::size_t diff_total = 0;
    for (int k = nets.k_min(); k <= nets.k_max(); ++k) {
        const auto& pts = nets.level(k);
        const double scale = nets.scale(k);
        NetsLevelReport lr;
        lr.k = k;
        lr.size = static_cast<Index>(pts.size());
        double sep = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < pts.size(); ++a)
            for (std::size_t b = a + 1; b < pts.size(); ++b)
                sep = std::min(sep, space.d(pts[a], pts[b]));
        lr.separation_ratio = std::isfinite(sep) ? sep / scale : std::numeric_limits<double>::infinity();
        double dens = 0.0;
        for (Index x = 0; x < space.size(); ++x) {
            double nearest = std::numeric_limits<double>::infinity();
            for (Index p : pts)
                nearest = std::min(nearest, space.d(x, p));
            dens = std::max(dens, nearest);
        }
        lr.density_ratio = dens / scale;
        if (k < nets.k_max()) {
            std::set<Index> finer(nets.level(k + 1).begin(), nets.level(k + 1).end());
            for (Index p : pts)
                lr.nested = lr.nested && finer.count(p) > 0;
            diff_total += nets.diff(k).size();
        }
        if (lr.separation_ratio < 1.0)
            report.violations.push_back("separation below delta^k at level " + std::to_string(k));
        if (!(lr.density_ratio < two_a0))
            report.violations.push_back("density ratio not below 2*A0 at level " + std::to_string(k));
        if (!lr.nested)
            report.violations.push_back("level " + std::to_string(k) + " not contained in the next level");
        report.levels.push_back(lr);
    }
    report.coarsest_single = nets.level(nets.k_min()).size() == 1;
    std::set<Index> finest(nets.level(nets.k_max()).begin(), nets.level(nets.k_max()).end());
    report.finest_complete = static_cast<Index>(finest.size()) == space.size();
    report.diff_count_ok = static_cast<Index>(diff_total) == space.size() - 1;
    if (!report.coarsest_single)
        report.violations.push_back("coarsest level is not a single point");
    if (!report.finest_complete)
        report.violations.push_back("finest level does not contain every point");
    if (!report.diff_count_ok)
        report.violations.push_back("difference sets do not total n - 1 points");
    return report;
}

} // namespace qmw
