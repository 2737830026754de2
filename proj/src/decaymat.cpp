#include "qmw/decaymat.hpp"

#include "qmw/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmw {

namespace {

void require_square(const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols())
        throw Error(ErrorKind::NonSquare, "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

void require_spd(const Eigen::MatrixXd& m)
{
    require_square(m);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error(ErrorKind::NotPositiveDefinite, "matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorisation failed");
}

Eigen::VectorXd start_vector(Index n)
{
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = 1.0 + 0.01 * static_cast<double>((i * 7919) % 101) / 101.0;
    return v.normalized();
}

template <typename Apply>
double rayleigh_power(Index n, Apply&& apply, int max_iter = 20000)
{
    Eigen::VectorXd v = start_vector(n);
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = apply(v);
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0)
            return 0.0;
        v = w / norm;
        if (it > 10 && std::abs(next - lambda) <= 1e-15 * std::abs(next))
            return next;
        lambda = next;
    }
    return lambda;
}

} // namespace

NormBounds operator_norm_bounds(const Eigen::MatrixXd& m)
{
    require_square(m);
    if (m.rows() == 0)
        return {};
    const double rows = m.cwiseAbs().rowwise().sum().maxCoeff();
    const double cols = m.cwiseAbs().colwise().sum().maxCoeff();
    const Eigen::MatrixXd mtm = m.transpose() * m;
    const double top = rayleigh_power(m.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(mtm * v); });
    NormBounds b;
    b.upper = std::sqrt(rows * cols);
    b.lower = std::min(std::sqrt(std::max(0.0, top)), b.upper);
    return b;
}

SpectralBounds spectral_bounds(const Eigen::MatrixXd& m)
{
    require_spd(m);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    SpectralBounds b;
    b.lambda_max = rayleigh_power(m.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(m * v); });
    const double inv_top = rayleigh_power(m.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(ldlt.solve(v)); });
    b.lambda_min = 1.0 / inv_top;
    return b;
}

namespace {

// Sums h^{-p} sum_n coeff_n A^n until the tail bound coeff_N r^N / (1 - r) drops below tol.
template <typename NextCoeff>
SeriesResult power_series(const Eigen::MatrixXd& m, double tol, Index max_terms, double power, NextCoeff&& next_coeff)
{
    const SpectralBounds sb = spectral_bounds(m);
    const Index n = m.rows();
    SeriesResult out;
    out.h = 0.5 * (sb.lambda_max + sb.lambda_min);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - m / out.h;
    // Rayleigh estimates approach the extremes from inside; guard with the
    // directly computed norm of A when it is available cheaply.
    out.ratio = (sb.lambda_max - sb.lambda_min) / (sb.lambda_max + sb.lambda_min);
    if (!(out.ratio < 1.0))
        throw Error(ErrorKind::NoConvergence, "series ratio is not below 1");

    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    double coeff = 1.0;
    double rn = 1.0;
    Index k = 0;
    const double r = out.ratio;
    while (coeff * rn / (1.0 - r) > tol) {
        if (k + 1 >= max_terms)
            throw Error(ErrorKind::NoConvergence, "series did not reach tolerance within max_terms");
        coeff = next_coeff(coeff, k);
        term = term * a;
        sum += coeff * term;
        rn *= r;
        ++k;
    }
    out.terms = k + 1;
    out.value = sum / std::pow(out.h, power);
    return out;
}

} // namespace

SeriesResult neumann_inverse(const Eigen::MatrixXd& m, double tol, Index max_terms)
{
    if (!(tol > 0.0))
        throw Error(ErrorKind::BadParams, "tolerance must be positive");
    return power_series(m, tol, max_terms, 1.0, [](double, Index) { return 1.0; });
}

SeriesResult inverse_sqrt(const Eigen::MatrixXd& m, double tol, Index max_terms)
{
    if (!(tol > 0.0))
        throw Error(ErrorKind::BadParams, "tolerance must be positive");
    SeriesResult out = power_series(m, tol, max_terms, 0.5, [](double c, Index k) {
        const auto kk = static_cast<double>(k);
        return c * (2.0 * kk + 1.0) / (2.0 * kk + 2.0);
    });
    out.value = 0.5 * (out.value + out.value.transpose());
    return out;
}

Eigen::MatrixXd general_inverse(const Eigen::MatrixXd& m, double tol, Index max_terms)
{
    require_square(m);
    const Eigen::MatrixXd mmt = m * m.transpose();
    return m.transpose() * neumann_inverse(0.5 * (mmt + mmt.transpose()), tol, max_terms).value;
}

Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& m)
{
    require_square(m);
    return m.partialPivLu().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::MatrixXd spectral_inverse_sqrt(const Eigen::MatrixXd& m)
{
    require_spd(m);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd inv_root = eig.eigenvalues().array().rsqrt();
    return eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose();
}

EnvelopeFit envelope_fit(std::span<const double> t, std::span<const double> y, double anchor, double rate_max)
{
    if (t.size() != y.size())
        throw Error(ErrorKind::DimensionMismatch, "envelope data of unequal length");
    EnvelopeFit fit;
    fit.points = static_cast<Index>(t.size());
    if (t.empty()) {
        fit.rate = rate_max;
        fit.log_C = -std::numeric_limits<double>::infinity();
        return fit;
    }

    std::vector<std::pair<double, double>> pts;
    pts.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        pts.emplace_back(t[i], y[i]);
    std::sort(pts.begin(), pts.end());

    // Upper concave hull, left to right.
    std::vector<std::pair<double, double>> hull;
    for (const auto& p : pts) {
        if (!hull.empty() && hull.back().first == p.first) {
            hull.back().second = std::max(hull.back().second, p.second);
            while (hull.size() >= 3) {
                const auto& o = hull[hull.size() - 3];
                const auto& a = hull[hull.size() - 2];
                const auto& b = hull.back();
                if ((a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first) >= 0.0)
                    hull.erase(hull.end() - 2);
                else
                    break;
            }
            continue;
        }
        while (hull.size() >= 2) {
            const auto& o = hull[hull.size() - 2];
            const auto& a = hull.back();
            if ((a.first - o.first) * (p.second - o.second) - (a.second - o.second) * (p.first - o.first) >= 0.0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }

    // The largest vertex at or left of the anchor decides which edge supports it.
    const double tol = 1e-12 * std::max(1.0, std::abs(anchor));
    std::ptrdiff_t j = -1;
    for (std::size_t v = 0; v < hull.size(); ++v)
        if (hull[v].first <= anchor + tol)
            j = static_cast<std::ptrdiff_t>(v);
    double rate;
    if (j < 0)
        rate = -rate_max;
    else if (j + 1 == static_cast<std::ptrdiff_t>(hull.size()))
        rate = rate_max;
    else {
        const auto& a = hull[static_cast<std::size_t>(j)];
        const auto& b = hull[static_cast<std::size_t>(j + 1)];
        rate = -(b.second - a.second) / (b.first - a.first);
    }
    fit.rate = std::clamp(rate, -rate_max, rate_max);
    double logc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i)
        logc = std::max(logc, y[i] + fit.rate * t[i]);
    fit.log_C = logc;
    return fit;
}

DecayFit decay_certificate(const Eigen::MatrixXd& m, const Eigen::MatrixXd& renorm_dist, double s, double rate_max)
{
    require_square(m);
    if (renorm_dist.rows() != m.rows() || renorm_dist.cols() != m.cols())
        throw Error(ErrorKind::DimensionMismatch, "distance and matrix shapes differ");
    if (!(s > 0.0 && s <= 1.0))
        throw Error(ErrorKind::BadParams, "decay exponent s must lie in (0, 1]");

    DecayFit fit;
    fit.s = s;
    std::vector<double> t, y;
    std::vector<std::pair<Index, Index>> idx;
    double anchor = 0.0;
    for (Index a = 0; a < m.rows(); ++a) {
        for (Index b = 0; b < m.cols(); ++b) {
            if (a == b)
                continue;
            const double ts = std::pow(renorm_dist(a, b), s);
            anchor += ts;
            ++fit.pairs;
            const double v = std::abs(m(a, b));
            if (v < kNumericalZero) {
                ++fit.negligible;
                continue;
            }
            t.push_back(ts);
            y.push_back(std::log(v));
            idx.emplace_back(a, b);
        }
    }
    if (fit.pairs == 0) {
        fit.c = rate_max;
        fit.C = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
        return fit;
    }
    anchor /= static_cast<double>(fit.pairs);
    const EnvelopeFit env = envelope_fit(t, y, anchor, rate_max);
    fit.c = env.rate;
    fit.C = std::exp(env.log_C);
    if (!fit.decays()) {
        double near_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] < anchor)
                near_max = std::max(near_max, y[i]);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= anchor && y[i] >= near_max)
                fit.refutation.push_back(idx[i]);
    }
    return fit;
}

bool separated_power_dominates(const Eigen::MatrixXd& renorm_dist, double s)
{
    for (Index a = 0; a < renorm_dist.rows(); ++a)
        for (Index b = 0; b < renorm_dist.cols(); ++b)
            if (a != b && renorm_dist(a, b) < std::pow(renorm_dist(a, b), s))
                return false;
    return true;
}

ChainConstants chain_constants(const Eigen::MatrixXd& dist, int n_max, double a0)
{
    require_square(dist);
    if (n_max < 1)
        throw Error(ErrorKind::BadParams, "n_max must be >= 1");
    const Index n = dist.rows();
    if (n > 4096)
        throw Error(ErrorKind::TooLarge, "chain constants limited to 4096 points");

    ChainConstants cc;
    Eigen::MatrixXd shortest = dist; // shortest chain length with at most `steps` links
    for (int steps = 1; steps <= n_max; ++steps) {
        if (steps > 1) {
            Eigen::MatrixXd next = shortest;
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j)
                    for (Index k = 0; k < n; ++k)
                        next(i, j) = std::min(next(i, j), shortest(i, k) + dist(k, j));
            shortest = std::move(next);
        }
        double kappa = 0.0;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (i != j && shortest(i, j) > 0.0)
                    kappa = std::max(kappa, dist(i, j) / shortest(i, j));
        if (n < 2)
            kappa = 1.0;
        cc.kappa.push_back(kappa);
    }
    const double slack = 1e-12;
    cc.kappa1_is_one = std::abs(cc.kappa[0] - 1.0) <= slack;
    if (cc.kappa.size() >= 2)
        cc.kappa2_le_a0 = cc.kappa[1] <= a0 * (1.0 + slack);
    for (std::size_t i = 0; i < cc.kappa.size(); ++i) {
        const double len = static_cast<double>(i + 1);
        if (cc.kappa[i] > std::pow(a0, 1.0 + std::log2(len)) * (1.0 + slack))
            cc.power_bound = false;
        if (i > 0 && cc.kappa[i] < cc.kappa[i - 1] * (1.0 - slack))
            cc.monotone = false;
    }
    return cc;
}

} // namespace qmw
