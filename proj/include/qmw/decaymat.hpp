#pragma once

// Matrices indexed by separated point sets whose entries decay exponentially
// in a (renormalised) quasi-distance: norm bounds, series inversion, inverse
// square roots, decay certificates and quasi-triangle chain constants.
//
// The series routines write M = h (I - A) with h = (lambda_max + lambda_min) / 2,
// so that ||A|| = (lambda_max - lambda_min) / (lambda_max + lambda_min) < 1, and sum
//     M^{-1}    = h^{-1}   sum_n A^n
//     M^{-1/2}  = h^{-1/2} sum_n c_n A^n,   c_n = binom(2n, n) / 4^n.
// Dense factorisations are kept alongside as oracles.

#include "qmw/space.hpp"

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

namespace qmw {

struct NormBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower: power-iteration Rayleigh quotient of M^T M; upper: Schur test.
NormBounds operator_norm_bounds(const Eigen::MatrixXd& m);

struct SpectralBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Power iteration for the top eigenvalue, inverse iteration for the bottom one.
/// Throws Error{NotPositiveDefinite} for non-symmetric or indefinite input.
SpectralBounds spectral_bounds(const Eigen::MatrixXd& m);

struct SeriesResult {
    Eigen::MatrixXd value;
    Index terms = 0;
    double h = 0.0;     ///< normalisation, M = h (I - A)
    double ratio = 0.0; ///< spectral radius estimate of A
};

SeriesResult neumann_inverse(const Eigen::MatrixXd& m, double tol = 1e-13, Index max_terms = 1'000'000);
SeriesResult inverse_sqrt(const Eigen::MatrixXd& m, double tol = 1e-13, Index max_terms = 1'000'000);

/// M^{-1} = M^T (M M^T)^{-1} for an invertible, not necessarily symmetric M.
Eigen::MatrixXd general_inverse(const Eigen::MatrixXd& m, double tol = 1e-13, Index max_terms = 1'000'000);

/// Oracles.
Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& m);
Eigen::MatrixXd spectral_inverse_sqrt(const Eigen::MatrixXd& m);

/// Upper envelope y <= log_C - rate * t. Among envelopes, the one minimising
/// the summed slack over all pairs, i.e. the supporting line of the upper
/// concave hull at t = anchor (ties resolved towards larger rate). The rate is
/// clamped to [-rate_max, rate_max]; an anchor right of every point means the
/// data decay arbitrarily fast and yields rate_max.
struct EnvelopeFit {
    double log_C = 0.0;
    double rate = 0.0;
    Index points = 0;
};

EnvelopeFit envelope_fit(std::span<const double> t, std::span<const double> y, double anchor, double rate_max);

struct DecayFit {
    double C = 0.0;
    double c = 0.0;
    double s = 1.0;
    Index pairs = 0;      ///< off-diagonal pairs
    Index negligible = 0; ///< pairs below the numerical-zero floor
    bool decays() const noexcept { return c > 0.0; }
    /// When c <= 0: far pairs at least as large as every near pair.
    std::vector<std::pair<Index, Index>> refutation;
};

inline constexpr double kNumericalZero = 1e-300;
inline constexpr double kDefaultRateMax = 50.0;

/// Fits sup exp(c d(a,b)^s) |M(a,b)| <= C over off-diagonal pairs.
DecayFit decay_certificate(const Eigen::MatrixXd& m, const Eigen::MatrixXd& renorm_dist, double s,
                           double rate_max = kDefaultRateMax);

/// True when d >= d^s on every off-diagonal pair (holds on 1-separated sets, s <= 1).
bool separated_power_dominates(const Eigen::MatrixXd& renorm_dist, double s);

struct ChainConstants {
    /// kappa[n-1] = kappa_n = max over chains a_0..a_n of d(a_0, a_n) / sum d(a_i, a_{i+1}).
    std::vector<double> kappa;
    bool exact = true;
    bool kappa1_is_one = true;
    bool kappa2_le_a0 = true;
    bool power_bound = true; ///< kappa_n <= A0^{1 + log2 n}
    bool monotone = true;
};

/// Exact chain constants through min-plus powers of the distance matrix
/// (chains may repeat points, so an n-step chain covers all shorter ones).
/// `a0` is the quasi-triangle constant the bounds are checked against.
ChainConstants chain_constants(const Eigen::MatrixXd& dist, int n_max, double a0);

} // namespace qmw
