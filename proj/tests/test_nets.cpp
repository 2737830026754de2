#include "support.hpp"

#include "qmw/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace qmw;
using namespace qmw::testing;

namespace {

// Separation, maximality (every other point lies within delta^k of the net) and nesting.
void check_nets_directly(const QuasiMetricSpace& s, const NestedNets& nets)
{
    for (int k = nets.k_min(); k <= nets.k_max(); ++k) {
        const auto& lvl = nets.level(k);
        const double r = nets.scale(k);
        for (std::size_t i = 0; i < lvl.size(); ++i)
            for (std::size_t j = i + 1; j < lvl.size(); ++j)
                CHECK(s.d(lvl[i], lvl[j]) >= r);
        // Coarse levels thin the next level; fine levels extend inside X.
        const std::set<Index> in(lvl.begin(), lvl.end());
        std::vector<Index> pool;
        if (k < 0 && k < nets.k_max())
            pool = nets.level(k + 1);
        else
            for (Index x = 0; x < s.size(); ++x)
                pool.push_back(x);
        auto nearest = [&](Index x) {
            double best = INFINITY;
            for (Index c : lvl)
                best = std::min(best, s.d(x, c));
            return best;
        };
        for (Index x : pool)
            if (!in.contains(x))
                CHECK(nearest(x) < r);
        for (Index x = 0; x < s.size(); ++x)
            CHECK(nearest(x) < 2.0 * s.a0() * r);
        if (k < nets.k_max()) {
            const auto& next = nets.level(k + 1);
            CHECK(std::equal(lvl.begin(), lvl.end(), next.begin()));
            CHECK(nets.diff(k).size() + lvl.size() == next.size());
        }
    }
    CHECK(nets.level(nets.k_min()).size() == 1);
    CHECK(static_cast<Index>(nets.level(nets.k_max()).size()) == s.size());
}

} // namespace

TEST_CASE("cyclic(8) nets at delta = 1/2")
{
    const auto s = make(ExampleKind::cyclic, 8);
    const auto nets = build_nets(s, 0.5);
    CHECK(nets.k_min() == -3);
    CHECK(nets.k_max() == 0);
    std::vector<std::size_t> sizes, diffs;
    for (int k = -3; k <= 0; ++k)
        sizes.push_back(nets.level(k).size());
    for (int k = -3; k < 0; ++k)
        diffs.push_back(nets.diff(k).size());
    CHECK(sizes == std::vector<std::size_t>{1, 2, 4, 8});
    CHECK(diffs == std::vector<std::size_t>{1, 2, 4});
    CHECK(nets.level(-2) == std::vector<Index>{0, 4});
    std::vector<Index> l1 = nets.level(-1);
    std::sort(l1.begin(), l1.end());
    CHECK(l1 == std::vector<Index>{0, 2, 4, 6});
    check_nets_directly(s, nets);
    const auto rep = verify_nets(s, nets);
    CHECK(rep.ok());
    for (const auto& l : rep.levels)
        CHECK(l.separation_ratio >= 1.0);
}

TEST_CASE("single point gives one level and no differences")
{
    const auto s = make(ExampleKind::interval, 1);
    const auto nets = build_nets(s, 0.5);
    CHECK(nets.num_levels() == 1);
    CHECK(nets.level(nets.k_min()) == std::vector<Index>{0});
    CHECK(verify_nets(s, nets).ok());
}

TEST_CASE("nets pass direct checks on the fleet for both policies")
{
    for (const auto& e : fleet()) {
        for (auto policy : {OrderPolicy::input_order, OrderPolicy::farthest_first}) {
            CAPTURE(e.name);
            const auto nets = build_nets(e.space, 0.5, policy);
            check_nets_directly(e.space, nets);
            CHECK(verify_nets(e.space, nets).ok());
        }
    }
    const auto snow = make(ExampleKind::snowflake, 40, 2, 3);
    for (double delta : {0.25, 0.5, 0.8}) {
        const auto nets = build_nets(snow, delta);
        check_nets_directly(snow, nets);
        CHECK(verify_nets(snow, nets).ok());
    }
}

TEST_CASE("corrupted nets are flagged")
{
    const auto s = make(ExampleKind::cyclic, 64);
    const auto nets = build_nets(s, 0.5);
    auto levels = nets.levels();
    // Thin one middle level to a single point: density and nesting break.
    const std::size_t mid = levels.size() - 2;
    levels[mid].resize(1);
    const auto bad = NestedNets::from_levels(0.5, nets.k_min(), levels);
    const auto rep = verify_nets(s, bad);
    CHECK_FALSE(rep.ok());
    const bool density = std::any_of(rep.violations.begin(), rep.violations.end(),
                                     [](const std::string& v) { return v.find("density") != std::string::npos; });
    CHECK(density);

    auto dropped = nets.levels();
    dropped.back().pop_back();
    CHECK_FALSE(verify_nets(s, NestedNets::from_levels(0.5, nets.k_min(), dropped)).ok());
}

TEST_CASE("nets are deterministic and the level count is logarithmic")
{
    const auto s = make(ExampleKind::point_cloud, 60, 2, 4);
    const auto a = build_nets(s, 0.5);
    const auto b = build_nets(s, 0.5);
    CHECK(a.levels() == b.levels());
    CHECK(a.k_min() == b.k_min());
    const double bound = std::log(s.diam() / s.minsep()) / std::log(2.0) + 3.0;
    CHECK(a.num_levels() <= bound);
}

TEST_CASE("delta outside (0,1) is rejected")
{
    const auto s = make(ExampleKind::cyclic, 8);
    for (double bad : {0.0, 1.0, -0.5, 2.0}) {
        try {
            build_nets(s, bad);
            FAIL("expected BadDelta");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::BadDelta);
        }
    }
}
