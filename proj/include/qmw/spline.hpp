#pragma once

// Splines s^k_alpha(x) = P_omega(x in Q^k_alpha(omega)), computed exactly.
//
// The level-k parent of a level-(k+1) node depends only on omega_k, and the
// omega_k are independent, so the ancestor distribution of a point factors
// into a product of per-level transition matrices:
//     s^{k_max} = identity,   s^k = p^k s^{k+1}.

#include "qmw/randgrid.hpp"

#include <Eigen/Dense>

#include <vector>

namespace qmw {

struct SplineSystem {
    int k_min = 0;
    int k_max = 0;
    /// values[k - k_min]: |X^k| x n, row alpha is s^k_alpha.
    std::vector<Eigen::MatrixXd> values;
    /// transitions[k - k_min]: |X^k| x |X^{k+1}|, p^k(alpha, beta) = P((k+1,beta) <=_omega (k,alpha)).
    std::vector<Eigen::MatrixXd> transitions;
    /// ball_mass[k - k_min](alpha) = mu(B(x^k_alpha, delta^k)).
    std::vector<Eigen::VectorXd> ball_mass;

    const Eigen::MatrixXd& at(int k) const { return values[static_cast<std::size_t>(k - k_min)]; }
    const Eigen::MatrixXd& transition(int k) const { return transitions[static_cast<std::size_t>(k - k_min)]; }
    const Eigen::VectorXd& mass(int k) const { return ball_mass[static_cast<std::size_t>(k - k_min)]; }
};

/// Exact expectation over all (L+1) M values of omega_k.
Eigen::MatrixXd transition_matrix(const QuasiMetricSpace& space, const DyadicStructure& grid, int k);

SplineSystem compute_splines(const QuasiMetricSpace& space, const DyadicStructure& grid);

struct SplineReport {
    double partition_of_unity = 0.0; ///< max_x |sum_alpha s^k_alpha(x) - 1|
    double interpolation = 0.0;      ///< max |s^k_alpha(x^k_beta) - delta_{alpha beta}|
    double refinement = 0.0;         ///< max |s^k - p^k s^{k+1}|
    double column_stochastic = 0.0;  ///< max_beta |sum_alpha p^k(alpha, beta) - 1|
    double range = 0.0;              ///< distance of spline values outside [0, 1]
    double self_transition = 0.0;    ///< max |p^k(alpha, alpha) - 1| for x^k_alpha seen at level k+1
    Index outer_support_violations = 0;
    Index inner_support_violations = 0;
    double holder_eta = 0.5;     ///< exponent used for holder_constant
    double holder_constant = 0.0; ///< max |s(x)-s(y)| / (d/delta^k)^eta over d <= delta^k
    double holder_eta_fit = 0.0;  ///< envelope-fitted exponent
    double holder_fit_constant = 0.0;
    Index holder_pairs = 0;

    bool exact_ok(double tol) const noexcept
    {
        return partition_of_unity <= tol && interpolation <= tol && refinement <= tol && column_stochastic <= tol
            && range <= tol;
    }
};

SplineReport verify_spline_theorem(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                                   double holder_eta = 0.5);

/// L^p(mu) norm of f - P_{V_k} f for each level (P_{V_k} the L^2 projection).
std::vector<double> spline_density_check(const QuasiMetricSpace& space, const SplineSystem& splines,
                                         const Eigen::VectorXd& f, double p);

} // namespace qmw
