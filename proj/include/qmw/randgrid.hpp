#pragma once

// Randomised dyadic grids over the reference nets.
//
// Levels are addressed by k; per-level containers are indexed by k - k_min.
// Transitions connect level k (parents) to level k+1 (children) for
// k_min <= k < k_max. Cubes use point-chain semantics: the level-k cube of a
// point x is the level-k ancestor of x's node at the finest level, so every
// level is an exact partition of X.

#include "qmw/nets.hpp"
#include "qmw/space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qmw {

struct ReferenceOrder {
    int k_min = 0;
    int k_max = 0;
    /// parent[k - k_min][beta] = alpha with (k+1, beta) <= (k, alpha).
    std::vector<std::vector<Index>> parent;
    /// children[k - k_min][alpha] = children of (k, alpha) at level k+1, increasing.
    std::vector<std::vector<std::vector<Index>>> children;

    Index parent_of(int k, Index beta) const { return parent[static_cast<std::size_t>(k - k_min)][static_cast<std::size_t>(beta)]; }
    const std::vector<Index>& children_of(int k, Index alpha) const
    {
        return children[static_cast<std::size_t>(k - k_min)][static_cast<std::size_t>(alpha)];
    }
};

/// Parent relation between consecutive levels. Throws Error{OrderViolation} when a child is
/// not within 2 A0 delta^k of its parent.
ReferenceOrder reference_order(const QuasiMetricSpace& space, const NestedNets& nets);

struct GridLabels {
    int k_min = 0;
    int k_max = 0;
    int L = 0; ///< maximal neighbour count; label1 takes values 0..L
    int M = 1; ///< maximal family size; label2 takes values 1..M
    std::vector<std::vector<int>> label1;                  ///< levels k_min..k_max-1
    std::vector<std::vector<int>> label2;                  ///< levels k_min..k_max
    std::vector<std::vector<std::vector<Index>>> neighbours; ///< levels k_min..k_max-1
    /// Neighbour pairs at distance >= 5 A0^3 delta^k (should be none).
    Index neighbour_bound_violations = 0;

    int label1_at(int k, Index alpha) const { return label1[static_cast<std::size_t>(k - k_min)][static_cast<std::size_t>(alpha)]; }
    int label2_at(int k, Index alpha) const { return label2[static_cast<std::size_t>(k - k_min)][static_cast<std::size_t>(alpha)]; }
    Index omega_size() const noexcept { return static_cast<Index>(L + 1) * M; }
};

GridLabels assign_labels(const QuasiMetricSpace& space, const NestedNets& nets, const ReferenceOrder& order);

/// Nets plus the deterministic structure built on top of them.
struct DyadicStructure {
    NestedNets nets;
    ReferenceOrder order;
    GridLabels labels;
};

DyadicStructure build_structure(const QuasiMetricSpace& space, NestedNets nets);

struct OmegaCoordinate {
    int k = 0;
    int ell = 0; ///< 0..L
    int m = 1;   ///< 1..M
    friend bool operator==(const OmegaCoordinate&, const OmegaCoordinate&) = default;
};

/// One coordinate per level k_min..k_max-1.
using Omega = std::vector<OmegaCoordinate>;

/// All (L+1) M coordinates of level k, ell-major.
std::vector<OmegaCoordinate> enumerate_omega_level(const GridLabels& labels, int k);

/// Uniform iid coordinates; level k of sample `sample` draws from the stream keyed by (seed, k, sample).
Omega sample_omega(const GridLabels& labels, std::uint64_t seed, std::uint64_t sample = 0);

/// Random new dyadic points z^k_alpha(omega_k) as point indices, alpha over level k.
std::vector<Index> random_points(const NestedNets& nets, const ReferenceOrder& order, const GridLabels& labels,
                                 const OmegaCoordinate& omega_k);

struct RandomParents {
    std::vector<Index> parent; ///< over level k+1
    /// Children with more than one random point inside the capture radius.
    Index ambiguous = 0;
};

/// The randomised parent relation between levels k+1 and k given z^k.
RandomParents random_order(const QuasiMetricSpace& space, const NestedNets& nets, const ReferenceOrder& order,
                           const std::vector<Index>& zpoints, int k);

struct RandomGrid {
    Omega omega;
    std::vector<std::vector<Index>> zpoints; ///< levels k_min..k_max-1
    std::vector<std::vector<Index>> parent;  ///< levels k_min..k_max-1, over level k+1
    /// cube_of[k - k_min][x] = alpha with x in Q^k_alpha; levels k_min..k_max.
    std::vector<std::vector<Index>> cube_of;
    Index ambiguous = 0;
};

/// Level-k cube labels for every point from a stack of parent maps.
std::vector<std::vector<Index>> build_cubes(const QuasiMetricSpace& space, const NestedNets& nets,
                                            const std::vector<std::vector<Index>>& parents);

RandomGrid build_random_grid(const QuasiMetricSpace& space, const DyadicStructure& grid, const Omega& omega);

/// Parent maps for every level and every omega_k, evaluated once through random_order.
class OmegaTable {
public:
    OmegaTable(const QuasiMetricSpace& space, const DyadicStructure& grid);

    Index omega_size() const noexcept { return omega_size_; }
    const std::vector<Index>& parents(int k, Index omega_index) const
    {
        return parents_[static_cast<std::size_t>(k - k_min_)][static_cast<std::size_t>(omega_index)];
    }
    const std::vector<Index>& zpoints(int k, Index omega_index) const
    {
        return z_[static_cast<std::size_t>(k - k_min_)][static_cast<std::size_t>(omega_index)];
    }
    Index ambiguous() const noexcept { return ambiguous_; }

private:
    int k_min_ = 0;
    Index omega_size_ = 1;
    std::vector<std::vector<std::vector<Index>>> parents_;
    std::vector<std::vector<std::vector<Index>>> z_;
    Index ambiguous_ = 0;
};

/// Index of a coordinate within enumerate_omega_level order.
Index omega_index(const GridLabels& labels, const OmegaCoordinate& w);

struct GridReport {
    // Exact structural facts.
    Index reference_implication_violations = 0; ///< order implications on the reference order
    Index self_parent_violations = 0;           ///< x^k_alpha at level k+1 not its own child
    Index ambiguous_parents = 0;                ///< over enumerated omega
    Index center_violations = 0;                ///< x^k_alpha outside Q^k_alpha (sampled omega)
    Index partition_violations = 0;             ///< covering recursion / partition (sampled omega)
    Index new_point_probability_violations = 0; ///< P(z^k_alpha = x^{k+1}_beta) < 1/((L+1)M)
    // Constant-chain checks (report-only; they presume delta small enough).
    Index z_separation_violations = 0;
    Index z_density_violations = 0;
    Index neighbour_bound_violations = 0;
    Index chain_implication_violations = 0;
    Index z_ball_violations = 0; ///< B(z, A0^-5 delta^k / 6) in Q in B(z, 6 A0^4 delta^k)
    Index x_ball_violations = 0; ///< B(x, A0^-3 delta^k / 8) in Q in closed B(x, 8 A0^5 delta^k)
    double min_new_point_probability = 1.0;
    Index samples = 0;

    bool exact_ok() const noexcept
    {
        return reference_implication_violations == 0 && self_parent_violations == 0 && ambiguous_parents == 0
            && center_violations == 0 && partition_violations == 0 && new_point_probability_violations == 0;
    }
};

GridReport verify_grid(const QuasiMetricSpace& space, const DyadicStructure& grid, Index num_samples,
                       std::uint64_t seed);

struct BoundaryRow {
    Index x = 0;
    int k = 0;
    double eps = 0.0;
    double freq = 0.0;
    double stderr_ = 0.0;
};

struct BoundaryStats {
    std::vector<double> eps_grid;
    std::vector<BoundaryRow> rows;
    std::vector<double> mean_freq;   ///< per eps, averaged over (x, k)
    std::vector<double> mean_stderr; ///< Monte Carlo standard error of mean_freq
    double eta_hat = 0.0;            ///< log-log slope of mean_freq against eps
    double eta_stderr = 0.0;
    double eta_ci_low = 0.0; ///< 95% normal interval
    double eta_ci_high = 0.0;
    Index fitted_points = 0;
    bool monotone = true;
    Index num_samples = 0;
    std::string warning;
};

/// Monte Carlo frequency of x lying within eps delta^k of the complement of its
/// level-k cube. Samples below 100 yield a warning, not an error.
BoundaryStats boundary_layer_stats(const QuasiMetricSpace& space, const DyadicStructure& grid,
                                   const std::vector<double>& eps_grid, Index num_samples, std::uint64_t seed,
                                   int jobs = 1);

} // namespace qmw
