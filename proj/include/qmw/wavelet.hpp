#pragma once

// Multiresolution analysis over the spline spaces V_k = span{s^k_alpha} and
// the orthonormal wavelets spanning W_k = V_{k+1} minus V_k.
//
// Matrices hold functions as rows (one column per point). With W = diag(mu),
// S = splines at level k and D = diag(mu(B(x^k_alpha, delta^k))):
//     M_k   = D^{-1/2} S W S^T D^{-1/2}
//     S~    = D^{-1/2} M_k^{-1} D^{-1/2} S          (dual splines)
//     K_k   = S^T S~                                (kernel of P_{V_k})
//     psi~  = s^{k+1}_beta - P_{V_k} s^{k+1}_beta,  beta in Y^k
//     psi   = M~_k^{-1/2} D'^{-1/2} Psi~,   D' = diag(mu(B(y^k_beta, delta^{k+1})))

#include "qmw/decaymat.hpp"
#include "qmw/spline.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace qmw {

struct MraLevel {
    int k = 0;
    Eigen::MatrixXd gram;  ///< M_k
    Eigen::MatrixXd duals; ///< rows are dual splines
    double riesz_min = 0.0;
    double riesz_max = 0.0;
};

struct Mra {
    int k_min = 0;
    int k_max = 0;
    std::vector<MraLevel> levels;
    const MraLevel& at(int k) const { return levels[static_cast<std::size_t>(k - k_min)]; }
};

Eigen::MatrixXd gram_matrix(const QuasiMetricSpace& space, const SplineSystem& splines, int k);
Eigen::MatrixXd dual_splines(const SplineSystem& splines, const Eigen::MatrixXd& gram, int k);
Mra build_mra(const QuasiMetricSpace& space, const SplineSystem& splines);

/// Kernel of P_{V_k}: (P f)(x) = sum_y K(x, y) f(y) mu(y).
Eigen::MatrixXd projector_kernel(const SplineSystem& splines, const Mra& mra, int k);

/// sum <f, s~_alpha> s_alpha; `form_gap` receives its distance to sum <f, s_alpha> s~_alpha.
Eigen::VectorXd project_Vk(const QuasiMetricSpace& space, const SplineSystem& splines, const Mra& mra, int k,
                           const Eigen::VectorXd& f, double* form_gap = nullptr);

struct MraReport {
    double biorthogonality = 0.0; ///< max |<s_a, s~_b> - delta_ab|
    double riesz_min = 0.0;       ///< smallest Gram eigenvalue over levels
    double riesz_max = 0.0;
    double nesting = 0.0;      ///< max |P_k P_{k+1} - P_k|
    double form_gap = 0.0;     ///< two projection formulas on random inputs
    double idempotence = 0.0;  ///< max |P_k P_k - P_k|
    double self_adjoint = 0.0; ///< max |K_k - K_k^T|
    double coarsest_constant = 0.0; ///< P at the coarsest level vs the mean
    double finest_identity = 0.0;   ///< P at the finest level vs identity
};

MraReport verify_mra(const QuasiMetricSpace& space, const SplineSystem& splines, const Mra& mra,
                     std::uint64_t seed = 1);

struct WaveletLevel {
    int k = 0;
    std::vector<Index> centers;  ///< point indices of Y^k
    Eigen::VectorXd center_mass; ///< mu(B(y, delta^k))
    Eigen::VectorXd fine_mass;   ///< mu(B(y, delta^{k+1}))
    Eigen::MatrixXd prewavelets; ///< rows psi~
    Eigen::MatrixXd mgram;       ///< M~_k
    Eigen::MatrixXd wavelets;    ///< rows psi, orthonormal in L^2(mu)
    Index rank = 0;
    double series_gap = 0.0; ///< max |series M~^{-1/2} - spectral M~^{-1/2}|
    Index series_terms = 0;
};

struct WaveletBasis {
    int k_min = 0;
    int k_max = 0;
    double delta = 0.5;
    std::vector<WaveletLevel> levels; ///< k_min..k_max-1
    Eigen::VectorXd constant;         ///< 1 / sqrt(mu(X))

    const WaveletLevel& at(int k) const { return levels[static_cast<std::size_t>(k - k_min)]; }
    Index count() const;
    /// Constant first, then wavelets level by level.
    Eigen::MatrixXd stacked() const;
};

Eigen::MatrixXd pre_wavelets(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                             const Mra& mra, int k);

/// Fills mgram, wavelets, rank and series diagnostics of `level` from its pre-wavelets.
/// Throws Error{RankDeficiency} when M~_k is numerically singular.
void orthonormalize(const QuasiMetricSpace& space, WaveletLevel& level, double series_tol = 1e-13);

WaveletBasis build_wavelets(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                            const Mra& mra);

struct WaveletReport {
    double orthonormality = 0.0; ///< max |<psi, psi'> - delta| incl. the constant
    double mean = 0.0;           ///< max |integral psi dmu|
    double completeness = 0.0;   ///< max round-trip error over random vectors
    double parseval = 0.0;       ///< max relative |sum coef^2 - ||f||^2|
    double vk_orthogonality = 0.0; ///< max |<psi^k, s^k_alpha>|
    Index count = 0;               ///< wavelets plus the constant
    Index expected_count = 0;      ///< n
    Index random_vectors = 0;
    double series_gap = 0.0;
    double decay_exponent = 1.0; ///< a
    double decay_C = 0.0;
    double decay_gamma = 0.0;
    double holder_eta = 0.0;
    double holder_C = 0.0;
    Index decay_pairs = 0;
    Index holder_pairs = 0;
};

WaveletReport verify_wavelet_theorem(const QuasiMetricSpace& space, const NestedNets& nets,
                                     const SplineSystem& splines, const WaveletBasis& basis,
                                     Index random_vectors = 20, std::uint64_t seed = 1);

/// Coefficients ordered like WaveletBasis::stacked().
Eigen::VectorXd wavelet_transform(const QuasiMetricSpace& space, const WaveletBasis& basis, const Eigen::VectorXd& f);
Eigen::VectorXd inverse_transform(const WaveletBasis& basis, const Eigen::VectorXd& coefficients);

} // namespace qmw
