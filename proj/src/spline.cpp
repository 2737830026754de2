#include "qmw/spline.hpp"

#include "qmw/decaymat.hpp"
#include "qmw/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace qmw {

Eigen::MatrixXd transition_matrix(const QuasiMetricSpace& space, const DyadicStructure& grid, int k)
{
    const NestedNets& nets = grid.nets;
    if (!nets.has_level(k) || !nets.has_level(k + 1))
        throw Error(ErrorKind::BadParams, "transition needs levels k and k+1");
    const auto rows = static_cast<Index>(nets.level(k).size());
    const auto cols = static_cast<Index>(nets.level(k + 1).size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(rows, cols);
    const auto coords = enumerate_omega_level(grid.labels, k);
    for (const auto& w : coords) {
        const auto z = random_points(nets, grid.order, grid.labels, w);
        const RandomParents rp = random_order(space, nets, grid.order, z, k);
        for (Index beta = 0; beta < cols; ++beta)
            counts(rp.parent[static_cast<std::size_t>(beta)], beta) += 1.0;
    }
    return counts / static_cast<double>(coords.size());
}

SplineSystem compute_splines(const QuasiMetricSpace& space, const DyadicStructure& grid)
{
    const NestedNets& nets = grid.nets;
    const Index n = space.size();
    SplineSystem sys;
    sys.k_min = nets.k_min();
    sys.k_max = nets.k_max();
    const auto levels = static_cast<std::size_t>(nets.num_levels());
    sys.values.resize(levels);
    sys.transitions.resize(levels - 1);
    sys.ball_mass.resize(levels);

    const auto& finest = nets.level(sys.k_max);
    Eigen::MatrixXd top = Eigen::MatrixXd::Zero(static_cast<Index>(finest.size()), n);
    for (std::size_t a = 0; a < finest.size(); ++a)
        top(static_cast<Index>(a), finest[a]) = 1.0;
    sys.values.back() = std::move(top);

    for (int k = sys.k_max - 1; k >= sys.k_min; --k) {
        const auto i = static_cast<std::size_t>(k - sys.k_min);
        sys.transitions[i] = transition_matrix(space, grid, k);
        sys.values[i] = sys.transitions[i] * sys.values[i + 1];
    }
    for (int k = sys.k_min; k <= sys.k_max; ++k) {
        const auto& lvl = nets.level(k);
        Eigen::VectorXd mass(static_cast<Index>(lvl.size()));
        for (std::size_t a = 0; a < lvl.size(); ++a)
            mass(static_cast<Index>(a)) = space.ball_mass(lvl[a], nets.scale(k));
        sys.ball_mass[static_cast<std::size_t>(k - sys.k_min)] = std::move(mass);
    }
    return sys;
}

SplineReport verify_spline_theorem(const QuasiMetricSpace& space, const NestedNets& nets, const SplineSystem& splines,
                                   double holder_eta)
{
    SplineReport rep;
    rep.holder_eta = holder_eta;
    const Index n = space.size();
    const double a0 = space.a0();
    std::vector<double> ht, hy;
    double anchor = 0.0;

    for (int k = splines.k_min; k <= splines.k_max; ++k) {
        const Eigen::MatrixXd& s = splines.at(k);
        const auto& lvl = nets.level(k);
        const double scale = nets.scale(k);
        const double inner = scale / (8.0 * a0 * a0 * a0);
        const double outer = 8.0 * std::pow(a0, 5) * scale;

        for (Index x = 0; x < n; ++x)
            rep.partition_of_unity = std::max(rep.partition_of_unity, std::abs(s.col(x).sum() - 1.0));
        for (Index a = 0; a < s.rows(); ++a) {
            for (std::size_t b = 0; b < lvl.size(); ++b) {
                const double want = a == static_cast<Index>(b) ? 1.0 : 0.0;
                rep.interpolation = std::max(rep.interpolation, std::abs(s(a, lvl[b]) - want));
            }
            const Index center = lvl[static_cast<std::size_t>(a)];
            for (Index x = 0; x < n; ++x) {
                const double v = s(a, x);
                rep.range = std::max({rep.range, -v, v - 1.0});
                const double d = space.d(center, x);
                if (d >= outer && v > 0.0)
                    ++rep.outer_support_violations;
                if (d < inner && v < 1.0 - 1e-12)
                    ++rep.inner_support_violations;
            }
        }

        if (k < splines.k_max) {
            const Eigen::MatrixXd& p = splines.transition(k);
            rep.refinement = std::max(rep.refinement, (s - p * splines.at(k + 1)).cwiseAbs().maxCoeff());
            for (Index b = 0; b < p.cols(); ++b)
                rep.column_stochastic = std::max(rep.column_stochastic, std::abs(p.col(b).sum() - 1.0));
            const auto& next = nets.level(k + 1);
            std::unordered_map<Index, Index> pos;
            for (std::size_t b = 0; b < next.size(); ++b)
                pos.emplace(next[b], static_cast<Index>(b));
            for (std::size_t a = 0; a < lvl.size(); ++a)
                if (auto it = pos.find(lvl[a]); it != pos.end())
                    rep.self_transition = std::max(rep.self_transition, std::abs(p(static_cast<Index>(a), it->second) - 1.0));
        }

        for (Index x = 0; x < n; ++x) {
            for (Index y = x + 1; y < n; ++y) {
                const double d = space.d(x, y);
                if (!(d > 0.0) || d > scale)
                    continue;
                const double rel = d / scale;
                const double tt = -std::log(rel);
                for (Index a = 0; a < s.rows(); ++a) {
                    const double diff = std::abs(s(a, x) - s(a, y));
                    ++rep.holder_pairs;
                    anchor += tt;
                    rep.holder_constant = std::max(rep.holder_constant, diff / std::pow(rel, holder_eta));
                    if (diff >= kNumericalZero) {
                        ht.push_back(tt);
                        hy.push_back(std::log(diff));
                    }
                }
            }
        }
    }
    for (auto& v : {&rep.partition_of_unity, &rep.range})
        *v = std::max(*v, 0.0);
    if (rep.holder_pairs > 0) {
        const EnvelopeFit fit = envelope_fit(ht, hy, anchor / static_cast<double>(rep.holder_pairs), 1.0);
        rep.holder_eta_fit = fit.rate;
        rep.holder_fit_constant = ht.empty() ? 0.0 : std::exp(fit.log_C);
    }
    return rep;
}

std::vector<double> spline_density_check(const QuasiMetricSpace& space, const SplineSystem& splines,
                                         const Eigen::VectorXd& f, double p)
{
    if (f.size() != space.size())
        throw Error(ErrorKind::DimensionMismatch, "function length differs from space size");
    if (!(p >= 1.0))
        throw Error(ErrorKind::BadExponent, "p must be >= 1");
    const Eigen::VectorXd& w = space.weights();
    std::vector<double> out;
    for (int k = splines.k_min; k <= splines.k_max; ++k) {
        const Eigen::MatrixXd& s = splines.at(k);
        const Eigen::MatrixXd gram = s * w.asDiagonal() * s.transpose();
        const Eigen::VectorXd rhs = s * w.asDiagonal() * f;
        const Eigen::VectorXd coef = gram.ldlt().solve(rhs);
        const Eigen::VectorXd residual = f - s.transpose() * coef;
        out.push_back(space.lp_norm(residual, p));
    }
    return out;
}

} // namespace qmw
