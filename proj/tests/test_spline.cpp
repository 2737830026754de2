#include "support.hpp"

#include "qmw/error.hpp"
#include "qmw/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace qmw;
using namespace qmw::testing;

namespace {

// Direct definition: p(alpha, beta) = fraction of omega_k with beta's random parent alpha.
Eigen::MatrixXd enumerated_transition(const QuasiMetricSpace& s, const DyadicStructure& g, int k)
{
    const auto omegas = enumerate_omega_level(g.labels, k);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Index>(g.nets.level(k).size()),
                                              static_cast<Index>(g.nets.level(k + 1).size()));
    for (const auto& w : omegas) {
        const auto z = random_points(g.nets, g.order, g.labels, w);
        const auto rp = random_order(s, g.nets, g.order, z, k);
        for (std::size_t b = 0; b < rp.parent.size(); ++b)
            p(rp.parent[b], static_cast<Index>(b)) += 1.0;
    }
    return p / static_cast<double>(omegas.size());
}

} // namespace

TEST_CASE("two-point space splines by hand")
{
    const auto s = from_table({{0, 1}, {1, 0}});
    const auto g = build_structure(s, build_nets(s, 0.5));
    REQUIRE(g.nets.k_min() == -1);
    REQUIRE(g.nets.k_max() == 0);
    const auto sp = compute_splines(s, g);
    CHECK(sp.at(-1).rows() == 1);
    CHECK(sp.at(-1)(0, 0) == 1.0);
    CHECK(sp.at(-1)(0, 1) == 1.0);
    CHECK(sp.at(0).isApprox(Eigen::MatrixXd::Identity(2, 2)));
    CHECK(sp.transition(-1)(0, 0) == 1.0);
    CHECK(sp.transition(-1)(0, 1) == 1.0);
}

TEST_CASE("coarsest splines are constant one and finest are indicators")
{
    for (const auto& e : fleet()) {
        CAPTURE(e.name);
        const auto g = build_structure(e.space, build_nets(e.space, 0.5));
        const auto sp = compute_splines(e.space, g);
        CHECK(max_abs(sp.at(g.nets.k_min()).array() - 1.0) == 0.0);
        const auto& fine = g.nets.level(g.nets.k_max());
        const Eigen::MatrixXd& top = sp.at(g.nets.k_max());
        for (std::size_t a = 0; a < fine.size(); ++a)
            for (Index x = 0; x < e.space.size(); ++x)
                CHECK(top(static_cast<Index>(a), x) == (fine[a] == x ? 1.0 : 0.0));
        const Eigen::MatrixXd& root = sp.transition(g.nets.k_min());
        CHECK(root.rows() == 1);
        CHECK(max_abs(root.array() - 1.0) == 0.0);
    }
}

TEST_CASE("transition matrices equal the enumerated definition and are column stochastic")
{
    for (auto s : {make(ExampleKind::cyclic, 8), make(ExampleKind::interval, 32), make(ExampleKind::koranyi_sphere, 24, 2, 2)}) {
        for (double delta : {0.5, 0.8}) {
            const auto g = build_structure(s, build_nets(s, delta));
            for (int k = g.nets.k_min(); k < g.nets.k_max(); ++k) {
                const Eigen::MatrixXd p = transition_matrix(s, g, k);
                const Eigen::MatrixXd oracle = enumerated_transition(s, g, k);
                CHECK(max_abs(p - oracle) <= 1e-15);
                CHECK(max_abs(p.colwise().sum().array() - 1.0) <= 1e-12);
                CHECK(p.minCoeff() >= 0.0);
            }
        }
    }
}

TEST_CASE("children captured for every omega have transition one")
{
    const auto s = make(ExampleKind::interval, 32);
    const auto g = build_structure(s, build_nets(s, 0.8));
    for (int k = g.nets.k_min(); k < g.nets.k_max(); ++k) {
        const Eigen::MatrixXd p = transition_matrix(s, g, k);
        const auto omegas = enumerate_omega_level(g.labels, k);
        const auto& fine = g.nets.level(k + 1);
        const double capture = g.nets.scale(k) / (4.0 * s.a0() * s.a0());
        for (Index a = 0; a < p.rows(); ++a)
            for (std::size_t b = 0; b < fine.size(); ++b) {
                bool always = true;
                for (const auto& w : omegas)
                    always = always && s.d(fine[b], random_points(g.nets, g.order, g.labels, w)[static_cast<std::size_t>(a)]) < capture;
                if (always)
                    CHECK(p(a, static_cast<Index>(b)) == doctest::Approx(1.0).epsilon(1e-15));
            }
    }
}

TEST_CASE("exact spline identities on cyclic(8)")
{
    const auto s = make(ExampleKind::cyclic, 8);
    const auto g = build_structure(s, build_nets(s, 0.5));
    const auto sp = compute_splines(s, g);
    const auto rep = verify_spline_theorem(s, g.nets, sp);
    CHECK(rep.partition_of_unity <= 1e-12);
    CHECK(rep.interpolation <= 1e-12);
    CHECK(rep.refinement <= 1e-12);
    CHECK(rep.column_stochastic <= 1e-12);
    CHECK(rep.range == 0.0);
    CHECK(rep.self_transition <= 1e-12);
    CHECK(rep.outer_support_violations == 0);
    CHECK(rep.inner_support_violations == 0);
    CHECK(std::isfinite(rep.holder_constant));
}

TEST_CASE("independent recomputation of the identities on randomised grids")
{
    const auto s = make(ExampleKind::interval, 32);
    const auto g = build_structure(s, build_nets(s, 0.8));
    const auto sp = compute_splines(s, g);
    for (int k = g.nets.k_min(); k <= g.nets.k_max(); ++k) {
        const Eigen::MatrixXd& v = sp.at(k);
        CHECK(max_abs(v.colwise().sum().array() - 1.0) <= 1e-12);
        CHECK(v.minCoeff() >= 0.0);
        CHECK(v.maxCoeff() <= 1.0 + 1e-15);
        const auto& lvl = g.nets.level(k);
        for (std::size_t a = 0; a < lvl.size(); ++a)
            for (std::size_t b = 0; b < lvl.size(); ++b)
                CHECK(std::abs(v(static_cast<Index>(a), lvl[b]) - (a == b ? 1.0 : 0.0)) <= 1e-12);
        if (k < g.nets.k_max())
            CHECK(max_abs(v - sp.transition(k) * sp.at(k + 1)) <= 1e-12);
    }
}

TEST_CASE("splines match Monte Carlo cube membership")
{
    const auto s = make(ExampleKind::interval, 24);
    const auto g = build_structure(s, build_nets(s, 0.8));
    const auto sp = compute_splines(s, g);
    const Index samples = 4000;
    std::vector<Eigen::MatrixXd> freq;
    for (int k = g.nets.k_min(); k <= g.nets.k_max(); ++k)
        freq.push_back(Eigen::MatrixXd::Zero(sp.at(k).rows(), s.size()));
    for (Index t = 0; t < samples; ++t) {
        const auto rg = build_random_grid(s, g, sample_omega(g.labels, 17, static_cast<std::uint64_t>(t)));
        for (std::size_t l = 0; l < freq.size(); ++l)
            for (Index x = 0; x < s.size(); ++x)
                freq[l](rg.cube_of[l][static_cast<std::size_t>(x)], x) += 1.0;
    }
    for (std::size_t l = 0; l < freq.size(); ++l) {
        const Eigen::MatrixXd& v = sp.values[l];
        for (Index a = 0; a < v.rows(); ++a)
            for (Index x = 0; x < v.cols(); ++x) {
                const double p = v(a, x);
                const double se = std::sqrt(p * (1.0 - p) / samples);
                CHECK(std::abs(freq[l](a, x) / samples - p) <= 4.0 * se + 1e-12);
            }
    }
}

TEST_CASE("relabelling permutes spline values")
{
    const auto s = make(ExampleKind::point_cloud, 20, 2, 6);
    const auto nets = build_nets(s, 0.5);
    std::vector<Index> perm(20), inv(20);
    for (Index i = 0; i < 20; ++i) {
        perm[static_cast<std::size_t>(i)] = (3 * i + 5) % 20;
        inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    }
    const auto moved = s.permuted(perm);
    auto levels = nets.levels();
    for (auto& l : levels)
        for (auto& p : l)
            p = inv[static_cast<std::size_t>(p)];
    const auto g0 = build_structure(s, nets);
    const auto g1 = build_structure(moved, NestedNets::from_levels(0.5, nets.k_min(), levels));
    const auto a = compute_splines(s, g0);
    const auto b = compute_splines(moved, g1);
    for (int k = nets.k_min(); k <= nets.k_max(); ++k)
        for (Index i = 0; i < 20; ++i)
            CHECK(max_abs(b.at(k).col(i) - a.at(k).col(perm[static_cast<std::size_t>(i)])) <= 1e-15);
}

TEST_CASE("density of spline spaces")
{
    const auto s = make(ExampleKind::interval, 64);
    const auto g = build_structure(s, build_nets(s, 0.5));
    const auto sp = compute_splines(s, g);
    for (double p : {1.0, 2.0, 3.0}) {
        const auto flat = spline_density_check(s, sp, Eigen::VectorXd::Constant(64, 2.5), p);
        for (double r : flat)
            CHECK(r <= 1e-12);
    }
    Rng rng(3);
    Eigen::VectorXd f(64);
    for (Index i = 0; i < 64; ++i)
        f(i) = rng.normal();
    CHECK(spline_density_check(s, sp, f, 2.0).back() <= 1e-12);

    Eigen::VectorXd spike = Eigen::VectorXd::Zero(64);
    spike(20) = 1.0;
    const auto res = spline_density_check(s, sp, spike, 2.0);
    CHECK(res.front() > 0.0);
    for (std::size_t i = 1; i < res.size(); ++i)
        CHECK(res[i] <= res[i - 1] + 1e-15);
    CHECK_THROWS_AS(spline_density_check(s, sp, spike, 0.5), Error);
}
