#include "support.hpp"

#include "qmw/error.hpp"
#include "qmw/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace qmw;
using namespace qmw::testing;

namespace {

struct LpFixture {
    Construction c;
    LPSystem lp;
};

LpFixture lp_for(QuasiMetricSpace s, double delta = 0.5)
{
    LpFixture f{construct(std::move(s), delta), {}};
    f.lp = build_lp(f.c.space, f.c.nets(), f.c.splines, f.c.mra, f.c.basis);
    return f;
}

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::BadParams;
}

QuasiMetricSpace two_cluster(Index n, double gap)
{
    ExampleParams p;
    p.n = n;
    p.gap = gap;
    return gen_example(ExampleKind::two_cluster, p, 1);
}

} // namespace

TEST_CASE("square function basics")
{
    const auto f = lp_for(make(ExampleKind::cyclic, 32));
    const auto& s = f.c.space;
    CHECK(max_abs(square_function(s, f.lp, Eigen::VectorXd::Constant(32, 4.0))) <= 1e-12);
    const Eigen::MatrixXd b = f.c.basis.stacked();
    for (Index r : {1, 5, 31}) {
        const Eigen::VectorXd psi = b.row(r).transpose();
        CHECK(max_abs(square_function(s, f.lp, psi) - psi.cwiseAbs()) <= 1e-12);
    }
    for (std::uint64_t t = 0; t < 10; ++t) {
        const Eigen::VectorXd g = random_mean_zero(s, 3, t);
        CHECK(std::abs(s.inner(g, Eigen::VectorXd::Ones(32))) <= 1e-12);
        CHECK(std::abs(s.lp_norm(square_function(s, f.lp, g), 2.0) / s.lp_norm(g, 2.0) - 1.0) <= 1e-10);
    }
    Eigen::VectorXd bump = Eigen::VectorXd::Zero(32);
    bump(3) = 1.0;
    CHECK(max_abs(square_function(s, f.lp, bump)) > 0.0);
}

TEST_CASE("Lp equivalence ratios")
{
    const auto f = lp_for(make(ExampleKind::cyclic, 64));
    const auto& s = f.c.space;
    const auto two = lp_equivalence(s, f.lp, 2.0, 50, 1);
    CHECK(std::abs(two.lower - 1.0) <= 1e-10);
    CHECK(std::abs(two.upper - 1.0) <= 1e-10);
    const auto four = lp_equivalence(s, f.lp, 4.0, 200, 1);
    CHECK(four.trials == 200);
    CHECK(four.lower > 0.0);
    CHECK(std::isfinite(four.upper));
    CHECK(four.lower <= four.upper);

    const Eigen::VectorXd g = random_mean_zero(s, 5, 0);
    for (double p : {1.5, 4.0}) {
        const double r1 = s.lp_norm(square_function(s, f.lp, g), p) / s.lp_norm(g, p);
        const double r2 = s.lp_norm(square_function(s, f.lp, 2.0 * g), p) / s.lp_norm(2.0 * g, p);
        CHECK(r1 == doctest::Approx(r2).epsilon(1e-14));
    }
    CHECK(kind_of([&] { lp_equivalence(s, f.lp, 1.0, 10, 1); }) == ErrorKind::BadExponent);
    CHECK(kind_of([&] { lp_equivalence(s, f.lp, INFINITY, 10, 1); }) == ErrorKind::BadExponent);
}

TEST_CASE("random sign operators")
{
    const auto f = lp_for(make(ExampleKind::interval, 40));
    const auto& s = f.c.space;
    const auto count = static_cast<std::size_t>(f.c.basis.count() - 1);
    const Eigen::MatrixXd plus = random_sign_operator(s, f.c.basis, std::vector<double>(count, 1.0));
    const Eigen::MatrixXd minus = random_sign_operator(s, f.c.basis, std::vector<double>(count, -1.0));
    const Eigen::MatrixXd t = random_sign_operator(s, f.c.basis, random_signs(f.c.basis, 8));
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd g = random_mean_zero(s, 2, trial);
        CHECK(max_abs(plus * g - g) <= 1e-10);
        CHECK(max_abs(minus * g + g) <= 1e-10);
        CHECK(std::abs(s.lp_norm(t * g, 2.0) - s.lp_norm(g, 2.0)) <= 1e-10 * s.lp_norm(g, 2.0));
    }
    const auto signs = random_signs(f.c.basis, 8);
    CHECK(signs.size() == count);
    for (double e : signs)
        CHECK(std::abs(e) == 1.0);
    CHECK(kind_of([&] { random_sign_operator(s, f.c.basis, std::vector<double>(count - 1, 1.0)); })
          == ErrorKind::IncompleteSigns);
}

TEST_CASE("Calderon-Zygmund sum: two points by hand, measure rescaling")
{
    for (double w1 : {1.0, 3.0}) {
        const auto f = lp_for(from_table({{0, 1}, {1, 0}}, {1.0, w1}));
        const auto& psi = f.c.basis.levels.front().wavelets;
        const double product = std::abs(psi(0, 0) * psi(0, 1));
        const auto cz = cz_kernel_bound(f.c.space, f.c.basis);
        CHECK(cz.constant == doctest::Approx(std::max(1.0, w1) * product).epsilon(1e-14));
    }
    for (auto s : {make(ExampleKind::interval, 128), make(ExampleKind::koranyi_sphere, 30, 2, 1)}) {
        const auto base = lp_for(s);
        const auto doubled = lp_for(s.with_scaled_measure(2.0));
        const double c1 = cz_kernel_bound(base.c.space, base.c.basis).constant;
        const double c2 = cz_kernel_bound(doubled.c.space, doubled.c.basis).constant;
        CHECK(std::isfinite(c1));
        CHECK(c1 > 0.0);
        CHECK(std::abs(c1 - c2) <= 1e-10 * c1);
    }
}

TEST_CASE("kernel identities and fits on interval(128)")
{
    const auto f = lp_for(make(ExampleKind::interval, 128));
    const auto& s = f.c.space;
    for (int k = f.lp.k_min; k < f.lp.k_max; ++k) {
        CHECK(max_abs(f.lp.p(k + 1) - f.lp.p(k) - f.lp.q(k)) <= 1e-12);
        CHECK(max_abs(s.weights().transpose() * f.lp.p(k) - Eigen::RowVectorXd::Ones(128)) <= 1e-10);
        CHECK(max_abs(s.weights().transpose() * f.lp.q(k)) <= 1e-10);
    }
    const auto rep = kernel_estimates(s, f.c.nets(), f.lp, exponent_s(s), exponent_a(s));
    CHECK(rep.telescoping <= 1e-12);
    CHECK(rep.p_row_sum <= 1e-10);
    CHECK(rep.q_row_sum <= 1e-10);
    CHECK(rep.route_gap <= 1e-10);
    CHECK(rep.symmetry <= 1e-12);
    CHECK(rep.p_size_all.gamma > 0.0);
    CHECK(std::isfinite(rep.p_size_all.C));
    CHECK(rep.p_size_all.pairs > 0);
}

TEST_CASE("empty difference nets: Q_k vanishes and the hole is infinite")
{
    const auto f = lp_for(two_cluster(4, 100.0));
    bool saw = false;
    for (int k = f.lp.k_min; k < f.lp.k_max; ++k)
        if (f.c.nets().diff(k).empty()) {
            saw = true;
            CHECK(max_abs(f.lp.q(k)) == 0.0);
            for (Index x = 0; x < f.c.space.size(); ++x)
                CHECK(std::isinf(f.lp.hole(k)(x)));
        }
    CHECK(saw);
    const auto rep = kernel_estimates(f.c.space, f.c.nets(), f.lp, 1.0, 1.0);
    CHECK(rep.telescoping <= 1e-12);
}

TEST_CASE("substitute inequality: single level and points inside the difference nets")
{
    const auto two = lp_for(from_table({{0, 1}, {1, 0}}));
    const auto rep = substitute_inequality_check(two.c.space, two.c.nets(), two.lp, 1.0, 1.0, 1.0, {1.0});
    for (const auto& row : rep.rows) {
        CHECK(std::isfinite(row.substitute));
        CHECK(row.substitute <= row.unrestricted);
        CHECK(row.substitute / row.reference <= 1.0 + 1e-12);
    }
    CHECK(std::isfinite(rep.max_substitute_ratio));

    const auto cyc = lp_for(make(ExampleKind::cyclic, 32));
    const auto all = substitute_inequality_check(cyc.c.space, cyc.c.nets(), cyc.lp, 1.0, 1.0, 1.0);
    CHECK(std::isfinite(all.max_substitute_ratio));
    CHECK(all.max_substitute_ratio <= all.max_unrestricted_ratio);
    CHECK_THROWS_AS(substitute_inequality_check(cyc.c.space, cyc.c.nets(), cyc.lp, 0.0, 1.0, 1.0), Error);
}

TEST_CASE("substitute inequality on a space with a hole")
{
    const auto f = lp_for(two_cluster(16, 100.0));
    const auto rep = substitute_inequality_check(f.c.space, f.c.nets(), f.lp, 1.0, 1.0, 1.0);
    CHECK(std::isfinite(rep.max_substitute_ratio));
    CHECK(rep.max_unrestricted_ratio > rep.max_substitute_ratio);
    CHECK(rep.stagnant_rows > 0);
}

TEST_CASE("growth sequences")
{
    const auto cyc = lp_for(make(ExampleKind::cyclic, 64));
    const auto g = growth_sequence(cyc.c.space, cyc.c.nets(), 5, 1.0);
    CHECK_FALSE(g.levels.empty());
    CHECK(g.epsilon > 0.0);
    for (std::size_t j = 1; j < g.levels.size(); ++j)
        CHECK(g.levels[j] < g.levels[j - 1]);
    CHECK(g.mass_constant >= 1.0 - 1e-12);
    CHECK(growth_sequence(cyc.c.space, cyc.c.nets(), 5, 2.0 * cyc.c.space.diam()).levels.size() <= 1);

    // Across the gap the ball mass stalls and the difference nets are far away.
    const auto tc = lp_for(two_cluster(16, 100.0));
    const auto& nets = tc.c.nets();
    const auto gs = growth_sequence(tc.c.space, nets, 0, 1.0);
    bool skipped = false;
    for (std::size_t j = 1; j < gs.levels.size(); ++j)
        for (int k = gs.levels[j - 1] - 1; k > gs.levels[j]; --k) {
            skipped = true;
            CHECK(tc.lp.hole(k)(0) >= nets.scale(k));
        }
    CHECK(skipped);
}
