#pragma once

// Shared fixtures: example spaces and the full construction on top of them.

#include "qmw/lpanalysis.hpp"
#include "qmw/nets.hpp"
#include "qmw/randgrid.hpp"
#include "qmw/space.hpp"
#include "qmw/spline.hpp"
#include "qmw/wavelet.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qmw::testing {

inline QuasiMetricSpace make(ExampleKind kind, Index n, int dim = 2, std::uint64_t seed = 1)
{
    ExampleParams p;
    p.n = n;
    p.dim = dim;
    if (kind == ExampleKind::binary_tree)
        p.depth = static_cast<int>(n);
    return gen_example(kind, p, seed);
}

inline QuasiMetricSpace from_table(const std::vector<std::vector<double>>& rows, std::vector<double> weights = {})
{
    const auto n = static_cast<Index>(rows.size());
    Eigen::MatrixXd d(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (std::size_t i = 0; i < weights.size(); ++i)
        w(static_cast<Index>(i)) = weights[i];
    return QuasiMetricSpace::build(std::move(d), std::move(w));
}

struct Construction {
    QuasiMetricSpace space;
    DyadicStructure grid;
    SplineSystem splines;
    Mra mra;
    WaveletBasis basis;

    const NestedNets& nets() const { return grid.nets; }
};

inline Construction construct(QuasiMetricSpace space, double delta = 0.5,
                              OrderPolicy policy = OrderPolicy::input_order)
{
    Construction c{std::move(space), {}, {}, {}, {}};
    c.grid = build_structure(c.space, build_nets(c.space, delta, policy));
    c.splines = compute_splines(c.space, c.grid);
    c.mra = build_mra(c.space, c.splines);
    c.basis = build_wavelets(c.space, c.grid.nets, c.splines, c.mra);
    return c;
}

struct FleetEntry {
    std::string name;
    QuasiMetricSpace space;
};

/// cyclic(8), cyclic(64), interval(64), binary_tree(4), point_cloud(50,2), koranyi_sphere(48,2).
inline std::vector<FleetEntry> fleet()
{
    std::vector<FleetEntry> out;
    out.push_back({"cyclic(8)", make(ExampleKind::cyclic, 8)});
    out.push_back({"cyclic(64)", make(ExampleKind::cyclic, 64)});
    out.push_back({"interval(64)", make(ExampleKind::interval, 64)});
    out.push_back({"binary_tree(4)", make(ExampleKind::binary_tree, 4)});
    out.push_back({"point_cloud(50,2)", make(ExampleKind::point_cloud, 50, 2, 1)});
    out.push_back({"koranyi_sphere(48,2)", make(ExampleKind::koranyi_sphere, 48, 2, 1)});
    return out;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

} // namespace qmw::testing
