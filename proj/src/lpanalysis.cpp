#include "qmw/lpanalysis.hpp"

#include "qmw/error.hpp"
#include "qmw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

KernelFit finish_fit(int k, const std::vector<double>& t, const std::vector<double>& y, double anchor_sum, Index pairs,
                     double rate_max)
{
    KernelFit fit;
    fit.k = k;
    fit.pairs = pairs;
    if (pairs == 0)
        return fit;
    const EnvelopeFit env = envelope_fit(t, y, anchor_sum / static_cast<double>(pairs), rate_max);
    fit.gamma = env.rate;
    fit.C = t.empty() ? 0.0 : std::exp(env.log_C);
    return fit;
}

} // namespace

LPSystem build_lp(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines, const Mra& mra,
                  const WaveletBasis& basis)
{
    const Index n = space.size();
    LPSystem lp;
    lp.k_min = basis.k_min;
    lp.k_max = basis.k_max;
    lp.total_mass = space.total_mass();
    Eigen::MatrixXd running = Eigen::MatrixXd::Constant(n, n, 1.0 / lp.total_mass);
    for (int k = lp.k_min; k <= lp.k_max; ++k) {
        lp.pkern.push_back(projector_kernel(splines, mra, k));
        lp.psum.push_back(running);
        if (k == lp.k_max)
            break;
        const Eigen::MatrixXd& psi = basis.at(k).wavelets;
        Eigen::MatrixXd q = psi.transpose() * psi;
        running += q;
        lp.qkern.push_back(std::move(q));

        Eigen::VectorXd hole = Eigen::VectorXd::Constant(n, kInf);
        for (Index y : nets.diff(k))
            for (Index x = 0; x < n; ++x)
                hole(x) = std::min(hole(x), space.d(x, y));
        lp.holes.push_back(std::move(hole));
    }
    return lp;
}

Eigen::VectorXd apply_kernel(const QuasiMetricSpace& space, const Eigen::MatrixXd& kernel, const Eigen::VectorXd& f)
{
    if (f.size() != space.size() || kernel.cols() != space.size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from space size");
    return kernel * space.weights().cwiseProduct(f);
}

Eigen::VectorXd square_function(const QuasiMetricSpace& space, const LPSystem& lp, const Eigen::VectorXd& f)
{
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(space.size());
    if (f.size() != space.size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from space size");
    for (const auto& q : lp.qkern)
        acc += apply_kernel(space, q, f).cwiseAbs2();
    return acc.cwiseSqrt();
}

Eigen::VectorXd random_mean_zero(const QuasiMetricSpace& space, std::uint64_t seed, std::uint64_t trial)
{
    Rng rng(stream_seed(seed, trial));
    Eigen::VectorXd f(space.size());
    for (Index i = 0; i < f.size(); ++i)
        f(i) = rng.normal();
    const double mean = space.weights().dot(f) / space.total_mass();
    return f.array() - mean;
}

LpRatios lp_equivalence(const QuasiMetricSpace& space, const LPSystem& lp, double p, Index trials, std::uint64_t seed)
{
    if (!(p > 1.0) || !std::isfinite(p))
        throw Error(ErrorKind::BadExponent, "p must lie in (1, inf)");
    if (trials < 1)
        throw Error(ErrorKind::BadParams, "at least one trial is required");
    LpRatios out;
    out.trials = trials;
    out.lower = kInf;
    for (Index t = 0; t < trials; ++t) {
        const Eigen::VectorXd f = random_mean_zero(space, seed, static_cast<std::uint64_t>(t));
        const double ratio = space.lp_norm(square_function(space, lp, f), p) / space.lp_norm(f, p);
        out.lower = std::min(out.lower, ratio);
        out.upper = std::max(out.upper, ratio);
    }
    return out;
}

std::vector<double> random_signs(const WaveletBasis& basis, std::uint64_t seed)
{
    Rng rng(stream_seed(seed, 0x5157u));
    std::vector<double> signs(static_cast<std::size_t>(basis.count() - 1));
    for (auto& s : signs)
        s = rng.below(2) ? 1.0 : -1.0;
    return signs;
}

Eigen::MatrixXd random_sign_operator(const QuasiMetricSpace& space, const WaveletBasis& basis,
                                     const std::vector<double>& signs)
{
    if (static_cast<Index>(signs.size()) != basis.count() - 1)
        throw Error(ErrorKind::IncompleteSigns, "expected one sign per wavelet");
    for (double s : signs)
        if (s != 1.0 && s != -1.0)
            throw Error(ErrorKind::IncompleteSigns, "signs must be +1 or -1");
    const Eigen::MatrixXd all = basis.stacked();
    Eigen::VectorXd eps(all.rows());
    eps(0) = 1.0;
    for (std::size_t i = 0; i < signs.size(); ++i)
        eps(static_cast<Index>(i) + 1) = signs[i];
    return all.transpose() * eps.asDiagonal() * all * space.weights().asDiagonal();
}

CzBound cz_kernel_bound(const QuasiMetricSpace& space, const WaveletBasis& basis)
{
    const Index n = space.size();
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
    for (const auto& lvl : basis.levels) {
        const Eigen::MatrixXd a = lvl.wavelets.cwiseAbs();
        total += a.transpose() * a;
    }
    CzBound out;
    for (Index x = 0; x < n; ++x)
        for (Index y = 0; y < n; ++y) {
            if (x == y)
                continue;
            const double v = space.ball_mass(x, space.d(x, y)) * total(x, y);
            if (v > out.constant) {
                out.constant = v;
                out.x = x;
                out.y = y;
            }
        }
    return out;
}

KernelReport kernel_estimates(const QuasiMetricSpace& space, const NestedNets& nets, const LPSystem& lp,
                              double s_exponent, double a_exponent)
{
    const Index n = space.size();
    const Eigen::VectorXd& w = space.weights();
    KernelReport rep;
    rep.s_exponent = s_exponent;
    rep.a_exponent = a_exponent;

    std::vector<double> pt_all, py_all, qt_all, qy_all, rt, ry;
    double pa_all = 0.0, qa_all = 0.0, ra = 0.0;
    Index pp_all = 0, qp_all = 0, rp = 0;

    for (int k = lp.k_min; k <= lp.k_max; ++k) {
        const Eigen::MatrixXd& pk = lp.p(k);
        const auto idx = static_cast<std::size_t>(k - lp.k_min);
        rep.p_row_sum = std::max(rep.p_row_sum, ((w.transpose() * pk).array() - 1.0).abs().maxCoeff());
        rep.symmetry = std::max(rep.symmetry, max_abs(pk - pk.transpose()));
        rep.route_gap = std::max(rep.route_gap, max_abs(pk - lp.psum[idx]));

        const double scale = nets.scale(k);
        Eigen::VectorXd root(n);
        for (Index x = 0; x < n; ++x)
            root(x) = std::sqrt(space.ball_mass(x, scale));

        std::vector<double> pt, py;
        double pa = 0.0;
        Index pp = 0;
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y) {
                const double t = std::pow(space.d(x, y) / scale, s_exponent);
                pa += t;
                ++pp;
                const double v = std::abs(pk(x, y)) * root(x) * root(y);
                if (v >= kNumericalZero) {
                    pt.push_back(t);
                    py.push_back(std::log(v));
                }
            }
        rep.p_size.push_back(finish_fit(k, pt, py, pa, pp, kDefaultRateMax));
        pt_all.insert(pt_all.end(), pt.begin(), pt.end());
        py_all.insert(py_all.end(), py.begin(), py.end());
        pa_all += pa;
        pp_all += pp;

        for (Index x = 0; x < n; ++x)
            for (Index x2 = x + 1; x2 < n; ++x2) {
                const double d = space.d(x, x2);
                if (!(d > 0.0) || d > scale)
                    continue;
                const double t = -std::log(d / scale);
                for (Index y = 0; y < n; ++y) {
                    ra += t;
                    ++rp;
                    const double v = std::abs(pk(x, y) - pk(x2, y)) * root(x) * root(y);
                    if (v >= kNumericalZero) {
                        rt.push_back(t);
                        ry.push_back(std::log(v));
                    }
                }
            }

        if (k == lp.k_max)
            break;
        const Eigen::MatrixXd& qk = lp.q(k);
        rep.q_row_sum = std::max(rep.q_row_sum, (w.transpose() * qk).cwiseAbs().maxCoeff());
        rep.telescoping = std::max(rep.telescoping, max_abs(lp.p(k + 1) - pk - qk));
        const Eigen::VectorXd& hole = lp.hole(k);
        if (!std::isfinite(hole.minCoeff()))
            continue;
        std::vector<double> qt, qy;
        double qa = 0.0;
        Index qp = 0;
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y) {
                const double t = std::pow(space.d(x, y) / scale, a_exponent) + std::pow(hole(x) / scale, a_exponent)
                    + std::pow(hole(y) / scale, a_exponent);
                qa += t;
                ++qp;
                const double v = std::abs(qk(x, y)) * root(x) * root(y);
                if (v >= kNumericalZero) {
                    qt.push_back(t);
                    qy.push_back(std::log(v));
                }
            }
        rep.q_holes.push_back(finish_fit(k, qt, qy, qa, qp, kDefaultRateMax));
        qt_all.insert(qt_all.end(), qt.begin(), qt.end());
        qy_all.insert(qy_all.end(), qy.begin(), qy.end());
        qa_all += qa;
        qp_all += qp;
    }
    rep.p_size_all = finish_fit(lp.k_min, pt_all, py_all, pa_all, pp_all, kDefaultRateMax);
    rep.q_holes_all = finish_fit(lp.k_min, qt_all, qy_all, qa_all, qp_all, kDefaultRateMax);
    const KernelFit reg = finish_fit(lp.k_min, rt, ry, ra, rp, 1.0);
    rep.p_regularity_eta = reg.gamma;
    rep.p_regularity_C = reg.C;
    for (const auto* fits : {&rep.p_size, &rep.q_holes})
        for (const auto& f : *fits)
            if (!(f.gamma > 0.0))
                ++rep.nonpositive_fits;
    return rep;
}

SubstituteReport substitute_inequality_check(const QuasiMetricSpace& space, const NestedNets& nets,
                                             const LPSystem& lp, double nu, double gamma, double a,
                                             std::vector<double> r_grid)
{
    if (!(nu > 0.0) || !(gamma > 0.0) || !(a > 0.0))
        throw Error(ErrorKind::BadParams, "nu, gamma and a must be positive");
    if (r_grid.empty())
        for (int k = lp.k_min; k < lp.k_max; ++k)
            r_grid.push_back(nets.scale(k));
    for (double r : r_grid)
        if (!(r > 0.0))
            throw Error(ErrorKind::BadParams, "radii must be positive");

    SubstituteReport rep;
    rep.nu = nu;
    rep.gamma = gamma;
    rep.a = a;
    rep.min_stagnant_factor = kInf;
    const double delta = nets.delta();
    for (Index x = 0; x < space.size(); ++x) {
        for (double r : r_grid) {
            SubstituteRow row;
            row.x = x;
            row.r = r;
            const double mass_r = space.ball_mass(x, r);
            row.reference = std::pow(mass_r, -nu);
            row.stagnant = space.ball_mass(x, delta * r) == mass_r;
            for (int k = lp.k_min; k < lp.k_max; ++k) {
                const double scale = nets.scale(k);
                if (scale < r)
                    continue;
                const double term = std::pow(space.ball_mass(x, scale), -nu);
                row.unrestricted += term;
                const double hole = lp.hole(k)(x);
                if (std::isfinite(hole))
                    row.substitute += term * std::exp(-gamma * std::pow(hole / scale, a));
            }
            rep.max_substitute_ratio = std::max(rep.max_substitute_ratio, row.substitute / row.reference);
            rep.max_unrestricted_ratio = std::max(rep.max_unrestricted_ratio, row.unrestricted / row.reference);
            if (row.stagnant && row.unrestricted > 0.0) {
                ++rep.stagnant_rows;
                rep.min_stagnant_factor = std::min(rep.min_stagnant_factor, row.unrestricted / row.substitute);
            }
            rep.rows.push_back(row);
        }
    }
    if (rep.stagnant_rows == 0)
        rep.min_stagnant_factor = 0.0;
    return rep;
}

GrowthSequence growth_sequence(const QuasiMetricSpace& space, const NestedNets& nets, Index x, double r)
{
    if (!(r > 0.0))
        throw Error(ErrorKind::BadParams, "radius must be positive");
    if (x < 0 || x >= space.size())
        throw Error(ErrorKind::BadParams, "point index out of range");
    GrowthSequence out;
    double growth = kInf;
    for (Index p = 0; p < space.size(); ++p)
        for (int k = nets.k_min() + 1; k <= nets.k_max(); ++k) {
            const double ratio = space.ball_mass(p, nets.scale(k - 1)) / space.ball_mass(p, nets.scale(k));
            if (ratio > 1.0)
                growth = std::min(growth, ratio);
        }
    out.epsilon = std::isfinite(growth) ? growth - 1.0 : 0.0;

    auto hole = [&](int k) {
        double h = kInf;
        for (Index y : nets.diff(k))
            h = std::min(h, space.d(x, y));
        return h;
    };

    int k = nets.k_max() - 1;
    while (k >= nets.k_min() && nets.scale(k) < r)
        --k;
    if (k < nets.k_min())
        return out;
    out.levels.push_back(k);
    for (int next = k - 1; next >= nets.k_min(); --next) {
        const double current = space.ball_mass(x, nets.scale(out.levels.back()));
        if (space.ball_mass(x, nets.scale(next)) >= (1.0 + out.epsilon) * current * (1.0 - 1e-12))
            out.levels.push_back(next);
    }

    const double base = space.ball_mass(x, r);
    out.mass_constant = kInf;
    out.holes_constant = kInf;
    for (std::size_t j = 0; j < out.levels.size(); ++j) {
        const int kj = out.levels[j];
        out.mass_constant = std::min(out.mass_constant, space.ball_mass(x, nets.scale(kj))
                                                            / (std::pow(1.0 + out.epsilon, static_cast<double>(j)) * base));
        if (j + 1 < out.levels.size())
            out.holes_constant = std::min(out.holes_constant, (hole(kj) + nets.scale(kj)) / nets.scale(out.levels[j + 1]));
    }
    return out;
}

} // namespace qmw
