#include "qmw/wavelet.hpp"

#include "qmw/error.hpp"
#include "qmw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmw {

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd random_vector(Index n, std::uint64_t seed, std::uint64_t key)
{
    Rng rng(stream_seed(seed, key));
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = rng.normal();
    return v;
}

} // namespace

Eigen::MatrixXd gram_matrix(const QuasiMetricSpace& space, const SplineSystem& splines, int k)
{
    const Eigen::MatrixXd& s = splines.at(k);
    const Eigen::VectorXd& mass = splines.mass(k);
    if ((mass.array() <= 0.0).any())
        throw Error(ErrorKind::ZeroBallMass, "ball of zero mass at level " + std::to_string(k));
    const Eigen::VectorXd inv_root = mass.array().rsqrt();
    Eigen::MatrixXd g = inv_root.asDiagonal() * (s * space.weights().asDiagonal() * s.transpose()) * inv_root.asDiagonal();
    return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd dual_splines(const SplineSystem& splines, const Eigen::MatrixXd& gram, int k)
{
    const Eigen::VectorXd inv_root = splines.mass(k).array().rsqrt();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::NotPositiveDefinite, "Gram matrix at level " + std::to_string(k));
    const Eigen::MatrixXd scaled = inv_root.asDiagonal() * splines.at(k);
    return inv_root.asDiagonal() * llt.solve(scaled);
}

Mra build_mra(const QuasiMetricSpace& space, const SplineSystem& splines)
{
    Mra mra;
    mra.k_min = splines.k_min;
    mra.k_max = splines.k_max;
    for (int k = splines.k_min; k <= splines.k_max; ++k) {
        MraLevel lvl;
        lvl.k = k;
        lvl.gram = gram_matrix(space, splines, k);
        lvl.duals = dual_splines(splines, lvl.gram, k);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lvl.gram, Eigen::EigenvaluesOnly);
        lvl.riesz_min = eig.eigenvalues().minCoeff();
        lvl.riesz_max = eig.eigenvalues().maxCoeff();
        mra.levels.push_back(std::move(lvl));
    }
    return mra;
}

Eigen::MatrixXd projector_kernel(const SplineSystem& splines, const Mra& mra, int k)
{
    Eigen::MatrixXd kern = splines.at(k).transpose() * mra.at(k).duals;
    return 0.5 * (kern + kern.transpose());
}

Eigen::VectorXd project_Vk(const QuasiMetricSpace& space, const SplineSystem& splines, const Mra& mra, int k,
                           const Eigen::VectorXd& f, double* form_gap)
{
    if (f.size() != space.size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from space size");
    const Eigen::MatrixXd& s = splines.at(k);
    const Eigen::MatrixXd& dual = mra.at(k).duals;
    const Eigen::VectorXd wf = space.weights().cwiseProduct(f);
    Eigen::VectorXd primal = s.transpose() * (dual * wf);
    if (form_gap) {
        const Eigen::VectorXd other = dual.transpose() * (s * wf);
        *form_gap = (primal - other).cwiseAbs().maxCoeff();
    }
    return primal;
}

MraReport verify_mra(const QuasiMetricSpace& space, const SplineSystem& splines, const Mra& mra, std::uint64_t seed)
{
    MraReport rep;
    const Index n = space.size();
    const Eigen::VectorXd& w = space.weights();
    rep.riesz_min = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd prev_op;
    for (int k = mra.k_min; k <= mra.k_max; ++k) {
        const MraLevel& lvl = mra.at(k);
        const Eigen::MatrixXd& s = splines.at(k);
        const Eigen::MatrixXd bi = s * w.asDiagonal() * lvl.duals.transpose();
        rep.biorthogonality = std::max(rep.biorthogonality, max_abs(bi - Eigen::MatrixXd::Identity(bi.rows(), bi.cols())));
        rep.riesz_min = std::min(rep.riesz_min, lvl.riesz_min);
        rep.riesz_max = std::max(rep.riesz_max, lvl.riesz_max);

        const Eigen::MatrixXd raw = s.transpose() * lvl.duals;
        rep.self_adjoint = std::max(rep.self_adjoint, max_abs(raw - raw.transpose()));
        const Eigen::MatrixXd op = raw * w.asDiagonal();
        rep.idempotence = std::max(rep.idempotence, max_abs(op * op - op));
        if (k > mra.k_min)
            rep.nesting = std::max(rep.nesting, max_abs(prev_op * op - prev_op));
        prev_op = op;

        for (std::uint64_t r = 0; r < 3; ++r) {
            double gap = 0.0;
            project_Vk(space, splines, mra, k, random_vector(n, seed, static_cast<std::uint64_t>(k - mra.k_min) * 3 + r), &gap);
            rep.form_gap = std::max(rep.form_gap, gap);
        }
        if (k == mra.k_min) {
            const Eigen::MatrixXd mean = Eigen::VectorXd::Ones(n) * w.transpose() / space.total_mass();
            rep.coarsest_constant = max_abs(op - mean);
        }
        if (k == mra.k_max)
            rep.finest_identity = max_abs(op - Eigen::MatrixXd::Identity(n, n));
    }
    return rep;
}

Index WaveletBasis::count() const
{
    Index c = 1;
    for (const auto& l : levels)
        c += l.wavelets.rows();
    return c;
}

Eigen::MatrixXd WaveletBasis::stacked() const
{
    Eigen::MatrixXd out(count(), constant.size());
    out.row(0) = constant.transpose();
    Index r = 1;
    for (const auto& l : levels) {
        out.middleRows(r, l.wavelets.rows()) = l.wavelets;
        r += l.wavelets.rows();
    }
    return out;
}

Eigen::MatrixXd pre_wavelets(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                             const Mra& mra, int k)
{
    if (k < splines.k_min || k >= splines.k_max)
        throw Error(ErrorKind::BadParams, "pre-wavelets need levels k and k+1");
    const Index offset = nets.diff_offset(k);
    const auto count = static_cast<Index>(nets.diff(k).size());
    const Eigen::MatrixXd fine = splines.at(k + 1).middleRows(offset, count);
    const Eigen::MatrixXd kern = projector_kernel(splines, mra, k);
    return fine - fine * space.weights().asDiagonal() * kern;
}

void orthonormalize(const QuasiMetricSpace& space, WaveletLevel& level, double series_tol)
{
    const Index m = level.prewavelets.rows();
    level.rank = 0;
    level.series_gap = 0.0;
    level.series_terms = 0;
    if (m == 0) {
        level.mgram.resize(0, 0);
        level.wavelets.resize(0, level.prewavelets.cols());
        return;
    }
    const Eigen::VectorXd inv_root = level.fine_mass.array().rsqrt();
    const Eigen::MatrixXd scaled = inv_root.asDiagonal() * level.prewavelets;
    Eigen::MatrixXd g = scaled * space.weights().asDiagonal() * scaled.transpose();
    level.mgram = 0.5 * (g + g.transpose());

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(level.mgram);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double top = ev.maxCoeff();
    for (Index i = 0; i < m; ++i)
        if (ev(i) > 1e-12 * top)
            ++level.rank;
    if (level.rank < m)
        throw Error(ErrorKind::RankDeficiency, "pre-wavelet Gram is singular at level " + std::to_string(level.k));

    const Eigen::MatrixXd root = eig.eigenvectors() * ev.array().rsqrt().matrix().asDiagonal() * eig.eigenvectors().transpose();
    const SeriesResult series = inverse_sqrt(level.mgram, series_tol);
    level.series_gap = max_abs(series.value - root);
    level.series_terms = series.terms;

    level.wavelets = root * scaled;
    for (Index r = 0; r < m; ++r)
        if (level.wavelets(r, level.centers[static_cast<std::size_t>(r)]) < 0.0)
            level.wavelets.row(r) *= -1.0;
}

WaveletBasis build_wavelets(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                            const Mra& mra)
{
    WaveletBasis basis;
    basis.k_min = splines.k_min;
    basis.k_max = splines.k_max;
    basis.delta = nets.delta();
    basis.constant = Eigen::VectorXd::Constant(space.size(), 1.0 / std::sqrt(space.total_mass()));
    for (int k = splines.k_min; k < splines.k_max; ++k) {
        WaveletLevel lvl;
        lvl.k = k;
        lvl.centers = nets.diff(k);
        const auto m = static_cast<Index>(lvl.centers.size());
        lvl.center_mass.resize(m);
        lvl.fine_mass.resize(m);
        for (Index b = 0; b < m; ++b) {
            const Index y = lvl.centers[static_cast<std::size_t>(b)];
            lvl.center_mass(b) = space.ball_mass(y, nets.scale(k));
            lvl.fine_mass(b) = space.ball_mass(y, nets.scale(k + 1));
        }
        lvl.prewavelets = pre_wavelets(space, nets, splines, mra, k);
        orthonormalize(space, lvl);
        basis.levels.push_back(std::move(lvl));
    }
    return basis;
}

Eigen::VectorXd wavelet_transform(const QuasiMetricSpace& space, const WaveletBasis& basis, const Eigen::VectorXd& f)
{
    if (f.size() != space.size() || basis.constant.size() != space.size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from basis length");
    return basis.stacked() * space.weights().cwiseProduct(f);
}

Eigen::VectorXd inverse_transform(const WaveletBasis& basis, const Eigen::VectorXd& coefficients)
{
    if (coefficients.size() != basis.count())
        throw Error(ErrorKind::DimensionMismatch, "coefficient count differs from basis size");
    return basis.stacked().transpose() * coefficients;
}

WaveletReport verify_wavelet_theorem(const QuasiMetricSpace& space, const NestedNets& nets,
                                     const SplineSystem& splines, const WaveletBasis& basis, Index random_vectors,
                                     std::uint64_t seed)
{
    WaveletReport rep;
    const Index n = space.size();
    const Eigen::VectorXd& w = space.weights();
    const Eigen::MatrixXd all = basis.stacked();
    rep.count = all.rows();
    rep.expected_count = n;
    rep.random_vectors = random_vectors;

    const Eigen::MatrixXd gram = all * w.asDiagonal() * all.transpose();
    rep.orthonormality = max_abs(gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    if (all.rows() > 1)
        rep.mean = (all.bottomRows(all.rows() - 1) * w).cwiseAbs().maxCoeff();

    for (Index r = 0; r < random_vectors; ++r) {
        const Eigen::VectorXd f = random_vector(n, seed, 1000 + static_cast<std::uint64_t>(r));
        const Eigen::VectorXd coef = wavelet_transform(space, basis, f);
        const Eigen::VectorXd back = inverse_transform(basis, coef);
        rep.completeness = std::max(rep.completeness, (back - f).cwiseAbs().maxCoeff());
        const double norm2 = space.inner(f, f);
        rep.parseval = std::max(rep.parseval, std::abs(coef.squaredNorm() - norm2) / norm2);
    }

    rep.decay_exponent = exponent_a(space);
    const double a = rep.decay_exponent;
    std::vector<double> dt, dy;
    double danchor = 0.0;
    for (const auto& lvl : basis.levels) {
        rep.series_gap = std::max(rep.series_gap, lvl.series_gap);
        if (lvl.wavelets.rows() == 0)
            continue;
        const Eigen::MatrixXd cross = lvl.wavelets * w.asDiagonal() * splines.at(lvl.k).transpose();
        rep.vk_orthogonality = std::max(rep.vk_orthogonality, max_abs(cross));
        const double scale = nets.scale(lvl.k);
        for (Index b = 0; b < lvl.wavelets.rows(); ++b) {
            const Index y = lvl.centers[static_cast<std::size_t>(b)];
            const double root_mass = std::sqrt(lvl.center_mass(b));
            for (Index x = 0; x < n; ++x) {
                const double t = std::pow(space.d(y, x) / scale, a);
                danchor += t;
                ++rep.decay_pairs;
                const double v = std::abs(lvl.wavelets(b, x)) * root_mass;
                if (v >= kNumericalZero) {
                    dt.push_back(t);
                    dy.push_back(std::log(v));
                }
            }
        }
    }
    if (rep.decay_pairs > 0) {
        const EnvelopeFit fit = envelope_fit(dt, dy, danchor / static_cast<double>(rep.decay_pairs), kDefaultRateMax);
        rep.decay_gamma = fit.rate;
        rep.decay_C = dt.empty() ? 0.0 : std::exp(fit.log_C);
    }

    // Hoelder quotient with the decay factor divided out at the nearer endpoint.
    std::vector<double> ht, hy;
    double hanchor = 0.0;
    for (const auto& lvl : basis.levels) {
        const double scale = nets.scale(lvl.k);
        for (Index b = 0; b < lvl.wavelets.rows(); ++b) {
            const Index c = lvl.centers[static_cast<std::size_t>(b)];
            const double root_mass = std::sqrt(lvl.center_mass(b));
            for (Index x = 0; x < n; ++x) {
                for (Index y = x + 1; y < n; ++y) {
                    const double d = space.d(x, y);
                    if (!(d > 0.0) || d > scale)
                        continue;
                    const double t = -std::log(d / scale);
                    hanchor += t;
                    ++rep.holder_pairs;
                    const double diff = std::abs(lvl.wavelets(b, x) - lvl.wavelets(b, y)) * root_mass;
                    if (diff < kNumericalZero)
                        continue;
                    const double near = std::pow(std::min(space.d(c, x), space.d(c, y)) / scale, a);
                    ht.push_back(t);
                    hy.push_back(std::log(diff) + rep.decay_gamma * near);
                }
            }
        }
    }
    if (rep.holder_pairs > 0) {
        const EnvelopeFit fit = envelope_fit(ht, hy, hanchor / static_cast<double>(rep.holder_pairs), 1.0);
        rep.holder_eta = fit.rate;
        rep.holder_C = ht.empty() ? 0.0 : std::exp(fit.log_C);
    }
    return rep;
}

} // namespace qmw
