#include "qmw/space.hpp"

#include "qmw/error.hpp"
#include "qmw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace qmw {

double quasi_triangle_constant(const Eigen::MatrixXd& dist)
{
    const Index n = dist.rows();
    double best = 1.0;
    for (Index i = 0; i < n; ++i) {
        for (Index k = i + 1; k < n; ++k) {
            const double dik = dist(i, k);
            // Only the largest ratio matters; the smallest detour bounds it.
            double detour = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < n; ++j) {
                if (j == i || j == k)
                    continue;
                detour = std::min(detour, dist(i, j) + dist(j, k));
            }
            if (std::isfinite(detour))
                best = std::max(best, dik / detour);
        }
    }
    return best;
}

QuasiMetricSpace QuasiMetricSpace::build(Eigen::MatrixXd dist, Eigen::VectorXd weights,
                                         std::optional<Eigen::MatrixXd> coords)
{
    const Index n = dist.rows();
    if (n == 0)
        throw Error(ErrorKind::DegenerateSpace, "empty point set");
    if (dist.cols() != n)
        throw Error(ErrorKind::AxiomViolation, "distance matrix is not square");
    if (weights.size() != n)
        throw Error(ErrorKind::AxiomViolation, "weights length differs from point count");
    if (coords && coords->rows() != n)
        throw Error(ErrorKind::AxiomViolation, "coordinate rows differ from point count");

    for (Index i = 0; i < n; ++i) {
        if (!(weights(i) > 0.0) || !std::isfinite(weights(i)))
            throw Error(ErrorKind::AxiomViolation, "weight " + std::to_string(i) + " is not positive");
        if (dist(i, i) != 0.0)
            throw Error(ErrorKind::AxiomViolation, "nonzero diagonal at " + std::to_string(i));
        for (Index j = 0; j < n; ++j) {
            const double v = dist(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorKind::AxiomViolation,
                            "negative or non-finite distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (i != j && v == 0.0)
                throw Error(ErrorKind::AxiomViolation,
                            "zero distance between distinct points " + std::to_string(i) + "," + std::to_string(j));
            if (v != dist(j, i))
                throw Error(ErrorKind::AxiomViolation,
                            "asymmetric distance at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }

    QuasiMetricSpace s;
    s.dist_ = std::move(dist);
    s.weights_ = std::move(weights);
    s.coords_ = std::move(coords);
    s.a0_ = quasi_triangle_constant(s.dist_);
    s.lipschitz_ = s.a0_ <= 1.0 + kLipschitzTolerance;
    s.diam_ = s.dist_.maxCoeff();
    double minsep = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            minsep = std::min(minsep, s.dist_(i, j));
    s.minsep_ = std::isfinite(minsep) ? minsep : 0.0;
    return s;
}

Ball QuasiMetricSpace::ball(Index center, double radius) const
{
    Ball b;
    b.center = center;
    b.radius = radius;
    for (Index j = 0; j < size(); ++j) {
        if (dist_(center, j) < radius) {
            b.members.push_back(j);
            b.mass += weights_(j);
        }
    }
    return b;
}

double QuasiMetricSpace::ball_mass(Index center, double radius) const
{
    double m = 0.0;
    for (Index j = 0; j < size(); ++j)
        if (dist_(center, j) < radius)
            m += weights_(j);
    return m;
}

QuasiMetricSpace QuasiMetricSpace::with_scaled_measure(double factor) const
{
    if (!(factor > 0.0))
        throw Error(ErrorKind::BadParams, "measure scale factor must be positive");
    QuasiMetricSpace s = *this;
    s.weights_ *= factor;
    return s;
}

QuasiMetricSpace QuasiMetricSpace::permuted(std::span<const Index> perm) const
{
    const Index n = size();
    if (static_cast<Index>(perm.size()) != n)
        throw Error(ErrorKind::DimensionMismatch, "permutation length differs from point count");
    Eigen::MatrixXd d(n, n);
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) {
        w(i) = weights_(perm[i]);
        for (Index j = 0; j < n; ++j)
            d(i, j) = dist_(perm[i], perm[j]);
    }
    std::optional<Eigen::MatrixXd> c;
    if (coords_) {
        c = Eigen::MatrixXd(n, coords_->cols());
        for (Index i = 0; i < n; ++i)
            c->row(i) = coords_->row(perm[i]);
    }
    return build(std::move(d), std::move(w), std::move(c));
}

double QuasiMetricSpace::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const
{
    if (f.size() != size() || g.size() != size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from point count");
    return (f.array() * g.array() * weights_.array()).sum();
}

double QuasiMetricSpace::lp_norm(const Eigen::VectorXd& f, double p) const
{
    if (f.size() != size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from point count");
    return std::pow((f.array().abs().pow(p) * weights_.array()).sum(), 1.0 / p);
}

double measure_doubling_constant(const QuasiMetricSpace& space, std::span<const double> radii)
{
    double best = 1.0;
    for (double r : radii) {
        for (Index x = 0; x < space.size(); ++x)
            best = std::max(best, space.ball_mass(x, 2.0 * r) / space.ball_mass(x, r));
    }
    return best;
}

int geometric_doubling_constant(const QuasiMetricSpace& space, std::span<const double> radii)
{
    int best = 1;
    for (double r : radii) {
        for (Index x = 0; x < space.size(); ++x) {
            // Centre outwards, so the count does not depend on the labelling.
            std::vector<Index> members = space.ball(x, 2.0 * r).members;
            std::stable_sort(members.begin(), members.end(),
                             [&](Index a, Index b) { return space.d(x, a) < space.d(x, b); });
            std::vector<Index> net;
            for (Index y : members) {
                const bool separated = std::all_of(net.begin(), net.end(),
                                                   [&](Index z) { return space.d(y, z) >= r; });
                if (separated)
                    net.push_back(y);
            }
            best = std::max(best, static_cast<int>(net.size()));
        }
    }
    return best;
}

double exponent_a(const QuasiMetricSpace& space)
{
    if (space.lipschitz())
        return 1.0;
    return 1.0 / (1.0 + 2.0 * std::log2(space.a0()));
}

double exponent_s(const QuasiMetricSpace& space)
{
    if (space.lipschitz())
        return 1.0;
    return 1.0 / (1.0 + std::log2(space.a0()));
}

std::optional<ExampleKind> parse_example_kind(std::string_view name)
{
    for (auto kind : {ExampleKind::cyclic, ExampleKind::interval, ExampleKind::binary_tree,
                      ExampleKind::point_cloud, ExampleKind::koranyi_sphere, ExampleKind::snowflake,
                      ExampleKind::two_cluster}) {
        if (to_string(kind) == name)
            return kind;
    }
    return std::nullopt;
}

std::string_view to_string(ExampleKind kind)
{
    switch (kind) {
    case ExampleKind::cyclic: return "cyclic";
    case ExampleKind::interval: return "interval";
    case ExampleKind::binary_tree: return "binary_tree";
    case ExampleKind::point_cloud: return "point_cloud";
    case ExampleKind::koranyi_sphere: return "koranyi_sphere";
    case ExampleKind::snowflake: return "snowflake";
    case ExampleKind::two_cluster: return "two_cluster";
    }
    return "unknown";
}

namespace {

Index cyclic_distance(Index i, Index j, Index n)
{
    const Index diff = i > j ? i - j : j - i;
    return std::min(diff, n - diff);
}

Eigen::MatrixXd uniform_cloud(Index n, int dim, std::uint64_t seed)
{
    Rng rng(stream_seed(seed, 0x636c6f7564ULL));
    Eigen::MatrixXd pts(n, dim);
    for (Index i = 0; i < n; ++i)
        for (int c = 0; c < dim; ++c)
            pts(i, c) = rng.uniform();
    return pts;
}

Eigen::MatrixXd euclidean(const Eigen::MatrixXd& pts)
{
    const Index n = pts.rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            d(i, j) = d(j, i) = (pts.row(i) - pts.row(j)).norm();
    return d;
}

} // namespace

QuasiMetricSpace gen_example(ExampleKind kind, const ExampleParams& p, std::uint64_t seed)
{
    switch (kind) {
    case ExampleKind::cyclic: {
        if (p.n < 1)
            throw Error(ErrorKind::BadParams, "cyclic size must be >= 1");
        Eigen::MatrixXd d(p.n, p.n);
        for (Index i = 0; i < p.n; ++i)
            for (Index j = 0; j < p.n; ++j)
                d(i, j) = static_cast<double>(cyclic_distance(i, j, p.n));
        return QuasiMetricSpace::build(std::move(d), Eigen::VectorXd::Ones(p.n));
    }
    case ExampleKind::interval: {
        if (p.n < 1)
            throw Error(ErrorKind::BadParams, "interval size must be >= 1");
        Eigen::MatrixXd pts(p.n, 1);
        for (Index i = 0; i < p.n; ++i)
            pts(i, 0) = p.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(p.n - 1);
        return QuasiMetricSpace::build(euclidean(pts), Eigen::VectorXd::Constant(p.n, 1.0 / p.n), pts);
    }
    case ExampleKind::binary_tree: {
        if (p.depth < 0 || p.depth > 12)
            throw Error(ErrorKind::BadParams, "binary_tree depth must be in [0, 12]");
        const Index n = Index{1} << p.depth;
        Eigen::MatrixXd d(n, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                int h = 0;
                for (auto x = static_cast<std::uint64_t>(i ^ j); x != 0; x >>= 1)
                    ++h;
                d(i, j) = 2.0 * h;
            }
        }
        return QuasiMetricSpace::build(std::move(d), Eigen::VectorXd::Ones(n));
    }
    case ExampleKind::point_cloud: {
        if (p.n < 1 || p.dim < 1)
            throw Error(ErrorKind::BadParams, "point_cloud needs n >= 1 and dim >= 1");
        Eigen::MatrixXd pts = uniform_cloud(p.n, p.dim, seed);
        return QuasiMetricSpace::build(euclidean(pts), Eigen::VectorXd::Constant(p.n, 1.0 / p.n), pts);
    }
    case ExampleKind::koranyi_sphere: {
        if (p.n < 1 || p.dim < 1)
            throw Error(ErrorKind::BadParams, "koranyi_sphere needs n >= 1 and dim >= 1");
        Rng rng(stream_seed(seed, 0x6b6f72616e7969ULL));
        // Row layout: [Re z_1, Im z_1, ..., Re z_dim, Im z_dim].
        Eigen::MatrixXd pts(p.n, 2 * p.dim);
        for (Index i = 0; i < p.n; ++i) {
            for (int c = 0; c < 2 * p.dim; ++c)
                pts(i, c) = rng.normal();
            pts.row(i) /= pts.row(i).norm();
        }
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p.n, p.n);
        for (Index i = 0; i < p.n; ++i) {
            for (Index j = i + 1; j < p.n; ++j) {
                std::complex<double> ip{0.0, 0.0};
                for (int c = 0; c < p.dim; ++c) {
                    const std::complex<double> z{pts(i, 2 * c), pts(i, 2 * c + 1)};
                    const std::complex<double> w{pts(j, 2 * c), pts(j, 2 * c + 1)};
                    ip += z * std::conj(w);
                }
                d(i, j) = d(j, i) = std::abs(1.0 - ip);
            }
        }
        return QuasiMetricSpace::build(std::move(d), Eigen::VectorXd::Constant(p.n, 1.0 / p.n), pts);
    }
    case ExampleKind::snowflake: {
        if (p.n < 1 || p.dim < 1)
            throw Error(ErrorKind::BadParams, "snowflake needs n >= 1 and dim >= 1");
        if (!(p.exponent > 0.0 && p.exponent <= 1.0))
            throw Error(ErrorKind::BadParams, "snowflake exponent must lie in (0, 1]");
        if (!(p.perturb >= 0.0))
            throw Error(ErrorKind::BadParams, "snowflake perturbation must be non-negative");
        Eigen::MatrixXd pts = uniform_cloud(p.n, p.dim, seed);
        Eigen::MatrixXd d = euclidean(pts);
        Rng rng(stream_seed(seed, 0x736e6f77ULL));
        for (Index i = 0; i < p.n; ++i)
            for (Index j = i + 1; j < p.n; ++j)
                d(i, j) = d(j, i) = std::pow(d(i, j), p.exponent) * (1.0 + p.perturb * rng.uniform());
        return QuasiMetricSpace::build(std::move(d), Eigen::VectorXd::Constant(p.n, 1.0 / p.n), pts);
    }
    case ExampleKind::two_cluster: {
        if (p.n < 1 || !(p.gap > 0.0))
            throw Error(ErrorKind::BadParams, "two_cluster needs n >= 1 and a positive gap");
        const Index n = 2 * p.n;
        Eigen::MatrixXd d(n, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                const bool same = (i < p.n) == (j < p.n);
                d(i, j) = same ? static_cast<double>(cyclic_distance(i % p.n, j % p.n, p.n)) : p.gap;
            }
        }
        return QuasiMetricSpace::build(std::move(d), Eigen::VectorXd::Ones(n));
    }
    }
    throw Error(ErrorKind::BadParams, "unknown example kind");
}

} // namespace qmw
