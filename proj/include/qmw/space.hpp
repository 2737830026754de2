#pragma once

// Finite spaces of homogeneous type: a point set {0..n-1}, a quasi-distance
// matrix and a measure given by positive point masses. Balls are open,
// B(x,r) = {y : d(x,y) < r}; on a finite set every subset is Borel, so the
// measurability caveats of the general theory do not arise.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qmw {

using Index = std::ptrdiff_t;

struct Ball {
    Index center = 0;
    double radius = 0.0;
    std::vector<Index> members;
    double mass = 0.0;
};

class QuasiMetricSpace {
public:
    /// Validates the quasi-distance axioms and computes A0 by a full triple scan.
    /// Throws Error{AxiomViolation} or Error{DegenerateSpace}.
    static QuasiMetricSpace build(Eigen::MatrixXd dist, Eigen::VectorXd weights,
                                  std::optional<Eigen::MatrixXd> coords = std::nullopt);

    Index size() const noexcept { return dist_.rows(); }
    double d(Index i, Index j) const { return dist_(i, j); }
    const Eigen::MatrixXd& dist() const noexcept { return dist_; }
    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    const std::optional<Eigen::MatrixXd>& coords() const noexcept { return coords_; }

    /// Quasi-triangle constant: the smallest A0 >= 1 with d(i,k) <= A0 (d(i,j) + d(j,k)).
    double a0() const noexcept { return a0_; }
    double diam() const noexcept { return diam_; }
    /// Smallest nonzero distance; 0 for a single point.
    double minsep() const noexcept { return minsep_; }
    bool lipschitz() const noexcept { return lipschitz_; }
    double total_mass() const noexcept { return weights_.sum(); }

    Ball ball(Index center, double radius) const;
    double ball_mass(Index center, double radius) const;

    /// Same points and distances with every weight multiplied by `factor`.
    QuasiMetricSpace with_scaled_measure(double factor) const;
    /// Relabelled copy: new point i is old point perm[i].
    QuasiMetricSpace permuted(std::span<const Index> perm) const;

    /// Weighted inner product <f, g> in L^2(mu).
    double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
    /// (sum |f|^p mu)^{1/p}.
    double lp_norm(const Eigen::VectorXd& f, double p) const;

private:
    Eigen::MatrixXd dist_;
    Eigen::VectorXd weights_;
    std::optional<Eigen::MatrixXd> coords_;
    double a0_ = 1.0;
    double diam_ = 0.0;
    double minsep_ = 0.0;
    bool lipschitz_ = true;
};

inline constexpr double kLipschitzTolerance = 1e-12;

/// Exhaustive quasi-triangle scan; the constant is clamped below at 1.
double quasi_triangle_constant(const Eigen::MatrixXd& dist);

double measure_doubling_constant(const QuasiMetricSpace& space, std::span<const double> radii);

/// Upper certificate for the geometric doubling constant: the largest greedy
/// r-separated subset of any ball B(x, 2r).
int geometric_doubling_constant(const QuasiMetricSpace& space, std::span<const double> radii);

/// a = (1 + 2 log2 A0)^{-1}, or 1 for a Lipschitz quasi-distance.
double exponent_a(const QuasiMetricSpace& space);

/// s = (1 + log2 A0)^{-1}, the decay exponent for inverses of decaying matrices.
double exponent_s(const QuasiMetricSpace& space);

enum class ExampleKind { cyclic, interval, binary_tree, point_cloud, koranyi_sphere, snowflake, two_cluster };

std::optional<ExampleKind> parse_example_kind(std::string_view name);
std::string_view to_string(ExampleKind kind);

struct ExampleParams {
    Index n = 8;           ///< point count (cyclic N, interval n, clouds, cluster size)
    int dim = 2;           ///< ambient dimension (point_cloud, koranyi_sphere, snowflake)
    int depth = 3;         ///< binary_tree depth
    double exponent = 0.5; ///< snowflake exponent in (0, 1]
    double perturb = 0.25; ///< snowflake multiplicative perturbation
    double gap = 100.0;    ///< two_cluster mutual distance
};

/// Example generators:
///  - cyclic(N): Z/NZ, wrap-around distance, unit weights
///  - interval(n): n equispaced points of [0,1], weights 1/n
///  - binary_tree(depth): the 2^depth leaves with path distance, unit weights
///  - point_cloud(n, dim): seeded uniform points of [0,1]^dim, weights 1/n
///  - koranyi_sphere(n, dim): seeded points of the unit sphere of C^dim with
///    d(z, w) = |1 - <z, w>|, weights 1/n
///  - snowflake(n, dim, exponent, perturb): |x - y|^exponent times a seeded
///    symmetric factor in [1, 1 + perturb], which breaks the triangle inequality
///  - two_cluster(n, gap): two copies of cyclic(n) at mutual distance `gap`
/// Throws Error{BadParams}.
QuasiMetricSpace gen_example(ExampleKind kind, const ExampleParams& params, std::uint64_t seed);

} // namespace qmw
