#include "support.hpp"

#include "qmw/error.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>

using namespace qmw;
using namespace qmw::testing;

namespace {

// Independent triple scan for the quasi-triangle constant.
double brute_a0(const Eigen::MatrixXd& d)
{
    double best = 1.0;
    const Index n = d.rows();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k) {
                const double denom = d(i, j) + d(j, k);
                if (denom > 0.0)
                    best = std::max(best, d(i, k) / denom);
            }
    return best;
}

QuasiMetricSpace three_point(double far)
{
    return from_table({{0, 1, far}, {1, 0, 1}, {far, 1, 0}});
}

} // namespace

TEST_CASE("cyclic(8) is a metric space of diameter 4")
{
    const auto s = make(ExampleKind::cyclic, 8);
    CHECK(s.size() == 8);
    CHECK(s.diam() == 4.0);
    CHECK(s.a0() == 1.0);
    CHECK(s.lipschitz());
    CHECK(exponent_a(s) == 1.0);
    CHECK(s.d(1, 7) == 2.0);
}

TEST_CASE("three-point quasi-metric has a0 = 3/2 and the constant is attained")
{
    const auto s = three_point(3.0);
    CHECK(s.a0() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(s.a0() == doctest::Approx(brute_a0(s.dist())).epsilon(1e-15));
    CHECK(quasi_triangle_constant(s.dist()) == doctest::Approx(1.5));
    CHECK(exponent_a(s) == doctest::Approx(1.0 / (1.0 + 2.0 * std::log2(1.5))).epsilon(1e-12));
    CHECK(exponent_a(s) == doctest::Approx(0.4608).epsilon(1e-4));
    CHECK(exponent_s(s) == doctest::Approx(1.0 / (1.0 + std::log2(1.5))));
}

TEST_CASE("a0 = 2 gives a = 1/3")
{
    const auto s = three_point(4.0);
    CHECK(s.a0() == doctest::Approx(2.0));
    CHECK(exponent_a(s) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("a0 matches an independent scan on generated spaces")
{
    for (auto kind : {ExampleKind::koranyi_sphere, ExampleKind::snowflake, ExampleKind::point_cloud}) {
        const auto s = make(kind, 24, 2, 5);
        const double oracle = brute_a0(s.dist());
        CHECK(s.a0() == doctest::Approx(oracle).epsilon(1e-14));
    }
}

TEST_CASE("axiom violations are rejected")
{
    CHECK_THROWS_AS(from_table({{0, -1}, {-1, 0}}), Error);
    try {
        from_table({{0, -1}, {-1, 0}});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::AxiomViolation);
    }
    auto kind_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::BadParams;
    };
    CHECK(kind_of([] { from_table({{0, 1}, {2, 0}}); }) == ErrorKind::AxiomViolation);
    CHECK(kind_of([] { from_table({{1, 1}, {1, 0}}); }) == ErrorKind::AxiomViolation);
    CHECK(kind_of([] { from_table({{0, 0}, {0, 0}}); }) == ErrorKind::AxiomViolation);
    CHECK(kind_of([] { from_table({{0, 1}, {1, 0}}, {1.0, 0.0}); }) == ErrorKind::AxiomViolation);
}

TEST_CASE("measure doubling constant by ball counting")
{
    const auto one = make(ExampleKind::interval, 1);
    const std::array<double, 2> radii{1.0, 2.0};
    CHECK(measure_doubling_constant(one, radii) == 1.0);

    const auto c8 = make(ExampleKind::cyclic, 8);
    const std::array<double, 1> r1{1.0};
    CHECK(measure_doubling_constant(c8, r1) == 3.0);
    const double both = measure_doubling_constant(c8, radii);
    CHECK(both >= 1.0);
    CHECK(both <= 8.0);
    CHECK(measure_doubling_constant(c8.with_scaled_measure(2.0), radii) == doctest::Approx(both));
}

TEST_CASE("geometric doubling constant")
{
    const std::array<double, 1> r1{1.0};
    CHECK(geometric_doubling_constant(make(ExampleKind::interval, 1), r1) == 1);
    CHECK(geometric_doubling_constant(make(ExampleKind::cyclic, 8), r1) <= 4);
    const auto cloud = make(ExampleKind::point_cloud, 40, 2, 3);
    const std::array<double, 3> radii{0.05, 0.1, 0.3};
    CHECK(geometric_doubling_constant(cloud, radii) >= 1);
}

TEST_CASE("doubling constants are invariant under relabelling")
{
    const auto cloud = make(ExampleKind::point_cloud, 30, 2, 9);
    std::vector<Index> perm(30);
    for (Index i = 0; i < 30; ++i)
        perm[static_cast<std::size_t>(i)] = (7 * i + 3) % 30;
    const auto moved = cloud.permuted(perm);
    const std::array<double, 3> radii{0.05, 0.1, 0.2};
    CHECK(measure_doubling_constant(moved, radii) == doctest::Approx(measure_doubling_constant(cloud, radii)));
    CHECK(geometric_doubling_constant(moved, radii) == geometric_doubling_constant(cloud, radii));
    CHECK(moved.d(0, 1) == cloud.d(3, 10));
}

TEST_CASE("single point space")
{
    const auto s = make(ExampleKind::interval, 1);
    CHECK(s.size() == 1);
    CHECK(s.diam() == 0.0);
    CHECK(s.minsep() == 0.0);
}

TEST_CASE("Koranyi distance is sandwiched by chordal distance")
{
    for (std::uint64_t seed : {1u, 2u, 7u}) {
        const auto s = make(ExampleKind::koranyi_sphere, 40, 2, seed);
        REQUIRE(s.coords());
        const Eigen::MatrixXd& z = *s.coords();
        for (Index i = 0; i < s.size(); ++i) {
            CHECK(z.row(i).norm() == doctest::Approx(1.0));
            for (Index j = i + 1; j < s.size(); ++j) {
                const double chord = (z.row(i) - z.row(j)).norm();
                CHECK(s.d(i, j) <= chord + 1e-12);
                CHECK(s.d(i, j) >= 0.5 * chord * chord - 1e-12);
            }
        }
        CHECK(s.a0() < 10.0);
        CHECK(s.a0() >= 1.0);
    }
}

TEST_CASE("generators are deterministic in the seed")
{
    const auto a = make(ExampleKind::koranyi_sphere, 20, 2, 7);
    const auto b = make(ExampleKind::koranyi_sphere, 20, 2, 7);
    const auto c = make(ExampleKind::koranyi_sphere, 20, 2, 8);
    CHECK(a.dist() == b.dist());
    CHECK(a.dist() != c.dist());
}

TEST_CASE("two_cluster distances")
{
    ExampleParams p;
    p.n = 4;
    p.gap = 100.0;
    const auto s = gen_example(ExampleKind::two_cluster, p, 1);
    CHECK(s.size() == 8);
    CHECK(s.d(0, 2) == 2.0);
    CHECK(s.d(0, 5) == 100.0);
    CHECK(s.d(4, 7) == 1.0);
}

TEST_CASE("generator parameter validation")
{
    ExampleParams p;
    p.n = 0;
    CHECK_THROWS_AS(gen_example(ExampleKind::cyclic, p, 1), Error);
    p.n = 5;
    p.exponent = 1.5;
    CHECK_THROWS_AS(gen_example(ExampleKind::snowflake, p, 1), Error);
}

TEST_CASE("balls are open")
{
    const auto c8 = make(ExampleKind::cyclic, 8);
    CHECK(c8.ball(0, 1.0).members.size() == 1);
    CHECK(c8.ball(0, 1.5).members.size() == 3);
    CHECK(c8.ball_mass(0, 100.0) == 8.0);
    const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0);
    CHECK(c8.inner(f, Eigen::VectorXd::Ones(8)) == 36.0);
    CHECK(c8.lp_norm(Eigen::VectorXd::Ones(8), 2.0) == doctest::Approx(std::sqrt(8.0)));
}
