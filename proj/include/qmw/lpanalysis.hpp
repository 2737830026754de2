#pragma once

// Littlewood-Paley pieces built from the wavelet basis: Q_k projects onto W_k,
// P_k onto V_k, with kernels taken against mu:
//     (Q_k f)(x) = sum_y Q_k(x, y) f(y) mu(y),   Q_k(x, y) = sum_beta psi^k_beta(x) psi^k_beta(y).
// Holes distances d(x, Y^k) are +infinity when Y^k is empty.

#include "qmw/wavelet.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace qmw {

struct LPSystem {
    int k_min = 0;
    int k_max = 0;
    std::vector<Eigen::MatrixXd> qkern;   ///< levels k_min..k_max-1
    std::vector<Eigen::MatrixXd> pkern;   ///< levels k_min..k_max, from the dual splines
    std::vector<Eigen::MatrixXd> psum;    ///< levels k_min..k_max, constants plus sum_{j<k} Q_j
    std::vector<Eigen::VectorXd> holes;   ///< levels k_min..k_max-1, d(x, Y^k)
    double total_mass = 0.0;

    const Eigen::MatrixXd& q(int k) const { return qkern[static_cast<std::size_t>(k - k_min)]; }
    const Eigen::MatrixXd& p(int k) const { return pkern[static_cast<std::size_t>(k - k_min)]; }
    const Eigen::VectorXd& hole(int k) const { return holes[static_cast<std::size_t>(k - k_min)]; }
};

LPSystem build_lp(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines, const Mra& mra,
                  const WaveletBasis& basis);

/// Kernel applied to f: K W f.
Eigen::VectorXd apply_kernel(const QuasiMetricSpace& space, const Eigen::MatrixXd& kernel, const Eigen::VectorXd& f);

Eigen::VectorXd square_function(const QuasiMetricSpace& space, const LPSystem& lp, const Eigen::VectorXd& f);

/// Seeded gaussian vector with its mu-mean removed.
Eigen::VectorXd random_mean_zero(const QuasiMetricSpace& space, std::uint64_t seed, std::uint64_t trial);

struct LpRatios {
    double lower = 0.0;
    double upper = 0.0;
    Index trials = 0;
};

/// min and max of ||Sf||_p / ||f||_p over random mean-zero f. Throws Error{BadExponent} unless 1 < p < inf.
LpRatios lp_equivalence(const QuasiMetricSpace& space, const LPSystem& lp, double p, Index trials, std::uint64_t seed);

/// One sign per wavelet, ordered like WaveletBasis::stacked() without the constant.
std::vector<double> random_signs(const WaveletBasis& basis, std::uint64_t seed);

/// Matrix of f -> sum eps psi <f, psi> + <f, 1> / mu(X). Throws Error{IncompleteSigns}.
Eigen::MatrixXd random_sign_operator(const QuasiMetricSpace& space, const WaveletBasis& basis,
                                     const std::vector<double>& signs);

struct CzBound {
    double constant = 0.0; ///< max_{x != y} mu(B(x, d(x,y))) sum |psi(x) psi(y)|
    Index x = 0;
    Index y = 0;
};

CzBound cz_kernel_bound(const QuasiMetricSpace& space, const WaveletBasis& basis);

struct KernelFit {
    int k = 0;
    double C = 0.0;
    double gamma = 0.0;
    Index pairs = 0;
};

struct KernelReport {
    double s_exponent = 1.0;
    double a_exponent = 1.0;
    double p_row_sum = 0.0;   ///< max |sum_x P_k(x,y) mu(x) - 1|
    double q_row_sum = 0.0;   ///< max |sum_x Q_k(x,y) mu(x)|
    double telescoping = 0.0; ///< max |P_{k+1} - P_k - Q_k|
    double route_gap = 0.0;   ///< dual-spline P_k against summed Q_j
    double symmetry = 0.0;
    std::vector<KernelFit> p_size;    ///< per level
    std::vector<KernelFit> q_holes;   ///< per level with nonempty Y^k
    KernelFit p_size_all;             ///< pooled over levels (k = k_min)
    KernelFit q_holes_all;
    double p_regularity_eta = 0.0;    ///< envelope-fitted exponent of the P_k regularity quotient
    double p_regularity_C = 0.0;
    Index nonpositive_fits = 0;
};

KernelReport kernel_estimates(const QuasiMetricSpace& space, const NestedNets& nets, const LPSystem& lp,
                              double s_exponent, double a_exponent);

struct SubstituteRow {
    Index x = 0;
    double r = 0.0;
    double substitute = 0.0;   ///< sum mu(B(x,delta^k))^-nu exp(-gamma (d(x,Y^k)/delta^k)^a)
    double unrestricted = 0.0; ///< sum mu(B(x,delta^k))^-nu
    double reference = 0.0;    ///< mu(B(x, r))^-nu
    bool stagnant = false;     ///< mu(B(x, delta r)) == mu(B(x, r)): no mass gained across the scale
};

struct SubstituteReport {
    double nu = 1.0;
    double gamma = 1.0;
    double a = 1.0;
    std::vector<SubstituteRow> rows;
    double max_substitute_ratio = 0.0;
    double max_unrestricted_ratio = 0.0;
    double min_stagnant_factor = 0.0; ///< min unrestricted / substitute over stagnant rows
    Index stagnant_rows = 0;
};

/// Sums run over levels k_min..k_max-1 with delta^k >= r. An empty r_grid means {delta^k}.
SubstituteReport substitute_inequality_check(const QuasiMetricSpace& space, const NestedNets& nets,
                                             const LPSystem& lp, double nu, double gamma, double a,
                                             std::vector<double> r_grid = {});

struct GrowthSequence {
    std::vector<int> levels; ///< decreasing k_0 > k_1 > ...
    double epsilon = 0.0;    ///< smallest positive mass growth ratio over the space, minus 1
    double mass_constant = 0.0;  ///< min_j mu(B(x,delta^{k_j})) / ((1+eps)^j mu(B(x,r)))
    double holes_constant = 0.0; ///< min_j (d(x,Y^{k_j}) + delta^{k_j}) / delta^{k_{j+1}}
};

GrowthSequence growth_sequence(const QuasiMetricSpace& space, const NestedNets& nets, Index x, double r);

} // namespace qmw
