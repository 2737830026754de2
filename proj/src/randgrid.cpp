#include "qmw/randgrid.hpp"

#include "qmw/error.hpp"
#include "qmw/parallel.hpp"
#include "qmw/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qmw {

namespace {

std::size_t lvl(int k, int k_min) { return static_cast<std::size_t>(k - k_min); }

// Position of each point inside level k, -1 when absent.
std::vector<Index> positions(const NestedNets& nets, int k, Index n)
{
    std::vector<Index> pos(static_cast<std::size_t>(n), -1);
    const auto& pts = nets.level(k);
    for (std::size_t a = 0; a < pts.size(); ++a)
        pos[static_cast<std::size_t>(pts[a])] = static_cast<Index>(a);
    return pos;
}

} // namespace

ReferenceOrder reference_order(const QuasiMetricSpace& space, const NestedNets& nets)
{
    ReferenceOrder order;
    order.k_min = nets.k_min();
    order.k_max = nets.k_max();
    const double a0 = space.a0();
    for (int k = nets.k_min(); k < nets.k_max(); ++k) {
        const auto& coarse = nets.level(k);
        const auto& fine = nets.level(k + 1);
        const double scale = nets.scale(k);
        std::vector<Index> parent(fine.size());
        std::vector<std::vector<Index>> children(coarse.size());
        for (std::size_t b = 0; b < fine.size(); ++b) {
            Index best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < coarse.size(); ++a) {
                const double dist = space.d(fine[b], coarse[a]);
                if (dist < best_d) {
                    best_d = dist;
                    best = static_cast<Index>(a);
                }
            }
            // Within the capture radius the parent is unique by separation, and
            // it is then also the nearest point.
            if (!(best_d < 2.0 * a0 * scale))
                throw Error(ErrorKind::OrderViolation,
                            "child " + std::to_string(fine[b]) + " at level " + std::to_string(k + 1)
                                + " is not within 2*A0*delta^k of level " + std::to_string(k));
            parent[b] = best;
            children[static_cast<std::size_t>(best)].push_back(static_cast<Index>(b));
        }
        order.parent.push_back(std::move(parent));
        order.children.push_back(std::move(children));
    }
    return order;
}

GridLabels assign_labels(const QuasiMetricSpace& space, const NestedNets& nets, const ReferenceOrder& order)
{
    GridLabels labels;
    labels.k_min = nets.k_min();
    labels.k_max = nets.k_max();
    const double a0 = space.a0();
    int max_degree = 0;
    int max_family = 1;

    labels.label2.push_back({1}); // the root has no siblings
    for (int k = nets.k_min(); k < nets.k_max(); ++k) {
        const auto& coarse = nets.level(k);
        const auto& fine = nets.level(k + 1);
        const double scale = nets.scale(k);
        const double proximity = scale / (2.0 * a0);
        const auto& parent = order.parent[lvl(k, nets.k_min())];

        std::vector<std::vector<char>> adjacent(coarse.size(), std::vector<char>(coarse.size(), 0));
        for (std::size_t g = 0; g < fine.size(); ++g) {
            for (std::size_t h = g + 1; h < fine.size(); ++h) {
                const auto pa = static_cast<std::size_t>(parent[g]);
                const auto pb = static_cast<std::size_t>(parent[h]);
                if (pa != pb && space.d(fine[g], fine[h]) < proximity)
                    adjacent[pa][pb] = adjacent[pb][pa] = 1;
            }
        }
        std::vector<std::vector<Index>> nbrs(coarse.size());
        for (std::size_t a = 0; a < coarse.size(); ++a) {
            for (std::size_t b = 0; b < coarse.size(); ++b) {
                if (!adjacent[a][b])
                    continue;
                nbrs[a].push_back(static_cast<Index>(b));
                if (b > a && !(space.d(coarse[a], coarse[b]) < 5.0 * a0 * a0 * a0 * scale))
                    ++labels.neighbour_bound_violations;
            }
            max_degree = std::max(max_degree, static_cast<int>(nbrs[a].size()));
        }

        // Greedy colouring in index order.
        std::vector<int> colour(coarse.size(), -1);
        for (std::size_t a = 0; a < coarse.size(); ++a) {
            std::vector<char> used(nbrs[a].size() + 1, 0);
            for (Index b : nbrs[a]) {
                const int c = colour[static_cast<std::size_t>(b)];
                if (c >= 0 && c < static_cast<int>(used.size()))
                    used[static_cast<std::size_t>(c)] = 1;
            }
            int c = 0;
            while (used[static_cast<std::size_t>(c)])
                ++c;
            colour[a] = c;
        }
        labels.label1.push_back(std::move(colour));
        labels.neighbours.push_back(std::move(nbrs));

        std::vector<int> label2(fine.size(), 0);
        for (const auto& family : order.children[lvl(k, nets.k_min())]) {
            int next = 1;
            for (Index b : family)
                label2[static_cast<std::size_t>(b)] = next++;
            max_family = std::max(max_family, static_cast<int>(family.size()));
        }
        labels.label2.push_back(std::move(label2));
    }
    labels.L = max_degree;
    labels.M = max_family;
    return labels;
}

DyadicStructure build_structure(const QuasiMetricSpace& space, NestedNets nets)
{
    DyadicStructure grid;
    grid.order = reference_order(space, nets);
    grid.labels = assign_labels(space, nets, grid.order);
    grid.nets = std::move(nets);
    return grid;
}

std::vector<OmegaCoordinate> enumerate_omega_level(const GridLabels& labels, int k)
{
    std::vector<OmegaCoordinate> all;
    all.reserve(static_cast<std::size_t>(labels.omega_size()));
    for (int ell = 0; ell <= labels.L; ++ell)
        for (int m = 1; m <= labels.M; ++m)
            all.push_back({k, ell, m});
    return all;
}

Index omega_index(const GridLabels& labels, const OmegaCoordinate& w)
{
    return static_cast<Index>(w.ell) * labels.M + (w.m - 1);
}

Omega sample_omega(const GridLabels& labels, std::uint64_t seed, std::uint64_t sample)
{
    Omega omega;
    const auto size = static_cast<std::uint64_t>(labels.omega_size());
    for (int k = labels.k_min; k < labels.k_max; ++k) {
        Rng rng(stream_seed(seed, 0x6f6d656761ULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(k)), sample));
        const auto idx = static_cast<int>(rng.below(size));
        omega.push_back({k, idx / labels.M, idx % labels.M + 1});
    }
    return omega;
}

std::vector<Index> random_points(const NestedNets& nets, const ReferenceOrder& order, const GridLabels& labels,
                                 const OmegaCoordinate& w)
{
    const int k = w.k;
    const auto& coarse = nets.level(k);
    const auto& fine = nets.level(k + 1);
    std::vector<Index> z(coarse.size());
    for (std::size_t a = 0; a < coarse.size(); ++a) {
        z[a] = coarse[a];
        if (labels.label1_at(k, static_cast<Index>(a)) != w.ell)
            continue;
        for (Index b : order.children_of(k, static_cast<Index>(a))) {
            if (labels.label2_at(k + 1, b) == w.m) {
                z[a] = fine[static_cast<std::size_t>(b)];
                break;
            }
        }
    }
    return z;
}

RandomParents random_order(const QuasiMetricSpace& space, const NestedNets& nets, const ReferenceOrder& order,
                           const std::vector<Index>& zpoints, int k)
{
    const auto& fine = nets.level(k + 1);
    const double a0 = space.a0();
    const double capture = nets.scale(k) / (4.0 * a0 * a0);
    RandomParents out;
    out.parent.resize(fine.size());
    for (std::size_t b = 0; b < fine.size(); ++b) {
        Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        int hits = 0;
        for (std::size_t a = 0; a < zpoints.size(); ++a) {
            const double dist = space.d(fine[b], zpoints[a]);
            if (dist < capture) {
                ++hits;
                if (dist < best_d) {
                    best_d = dist;
                    best = static_cast<Index>(a);
                }
            }
        }
        if (hits > 1)
            ++out.ambiguous;
        out.parent[b] = best >= 0 ? best : order.parent_of(k, static_cast<Index>(b));
    }
    return out;
}

std::vector<std::vector<Index>> build_cubes(const QuasiMetricSpace& space, const NestedNets& nets,
                                            const std::vector<std::vector<Index>>& parents)
{
    const Index n = space.size();
    std::vector<std::vector<Index>> cube_of(static_cast<std::size_t>(nets.num_levels()),
                                            std::vector<Index>(static_cast<std::size_t>(n)));
    auto& finest = cube_of.back();
    const auto pos = positions(nets, nets.k_max(), n);
    for (Index x = 0; x < n; ++x)
        finest[static_cast<std::size_t>(x)] = pos[static_cast<std::size_t>(x)];
    for (int k = nets.k_max() - 1; k >= nets.k_min(); --k) {
        const auto& up = parents[lvl(k, nets.k_min())];
        const auto& below = cube_of[lvl(k + 1, nets.k_min())];
        auto& here = cube_of[lvl(k, nets.k_min())];
        for (Index x = 0; x < n; ++x)
            here[static_cast<std::size_t>(x)] = up[static_cast<std::size_t>(below[static_cast<std::size_t>(x)])];
    }
    return cube_of;
}

RandomGrid build_random_grid(const QuasiMetricSpace& space, const DyadicStructure& grid, const Omega& omega)
{
    const auto& nets = grid.nets;
    if (static_cast<int>(omega.size()) != nets.num_levels() - 1)
        throw Error(ErrorKind::DimensionMismatch, "omega must carry one coordinate per non-finest level");
    RandomGrid rg;
    rg.omega = omega;
    for (const auto& w : omega) {
        auto z = random_points(nets, grid.order, grid.labels, w);
        auto rp = random_order(space, nets, grid.order, z, w.k);
        rg.ambiguous += rp.ambiguous;
        rg.zpoints.push_back(std::move(z));
        rg.parent.push_back(std::move(rp.parent));
    }
    rg.cube_of = build_cubes(space, nets, rg.parent);
    return rg;
}

OmegaTable::OmegaTable(const QuasiMetricSpace& space, const DyadicStructure& grid)
    : k_min_(grid.nets.k_min()), omega_size_(grid.labels.omega_size())
{
    for (int k = grid.nets.k_min(); k < grid.nets.k_max(); ++k) {
        std::vector<std::vector<Index>> level_parents;
        std::vector<std::vector<Index>> level_z;
        for (const auto& w : enumerate_omega_level(grid.labels, k)) {
            auto z = random_points(grid.nets, grid.order, grid.labels, w);
            auto rp = random_order(space, grid.nets, grid.order, z, k);
            ambiguous_ += rp.ambiguous;
            level_parents.push_back(std::move(rp.parent));
            level_z.push_back(std::move(z));
        }
        parents_.push_back(std::move(level_parents));
        z_.push_back(std::move(level_z));
    }
}

GridReport verify_grid(const QuasiMetricSpace& space, const DyadicStructure& grid, Index num_samples,
                       std::uint64_t seed)
{
    const auto& nets = grid.nets;
    const auto& order = grid.order;
    const auto& labels = grid.labels;
    const double a0 = space.a0();
    const Index n = space.size();
    const int k_min = nets.k_min();
    GridReport rep;
    rep.neighbour_bound_violations = labels.neighbour_bound_violations;

    const OmegaTable table(space, grid);
    rep.ambiguous_parents = table.ambiguous();
    const Index omega_size = table.omega_size();

    for (int k = k_min; k < nets.k_max(); ++k) {
        const auto& coarse = nets.level(k);
        const auto& fine = nets.level(k + 1);
        const double scale = nets.scale(k);
        const auto fine_pos = positions(nets, k + 1, n);

        for (std::size_t b = 0; b < fine.size(); ++b) {
            for (std::size_t a = 0; a < coarse.size(); ++a) {
                const double dist = space.d(fine[b], coarse[a]);
                const bool is_parent = order.parent_of(k, static_cast<Index>(b)) == static_cast<Index>(a);
                if (dist < scale / (2.0 * a0) && !is_parent)
                    ++rep.reference_implication_violations;
                if (is_parent && !(dist < 2.0 * a0 * scale))
                    ++rep.reference_implication_violations;
            }
        }
        for (std::size_t a = 0; a < coarse.size(); ++a) {
            const Index self = fine_pos[static_cast<std::size_t>(coarse[a])];
            if (self < 0 || order.parent_of(k, self) != static_cast<Index>(a))
                ++rep.self_parent_violations;
        }

        // Exact enumeration over omega_k.
        std::vector<Index> became_new(fine.size(), 0);
        for (Index w = 0; w < omega_size; ++w) {
            const auto& z = table.zpoints(k, w);
            for (std::size_t a = 0; a < z.size(); ++a) {
                if (const Index b = fine_pos[static_cast<std::size_t>(z[a])]; b >= 0)
                    ++became_new[static_cast<std::size_t>(b)];
                for (std::size_t c = a + 1; c < z.size(); ++c)
                    if (space.d(z[a], z[c]) < scale / (2.0 * a0))
                        ++rep.z_separation_violations;
            }
            for (Index x = 0; x < n; ++x) {
                double nearest = std::numeric_limits<double>::infinity();
                for (Index p : z)
                    nearest = std::min(nearest, space.d(x, p));
                if (!(nearest < 4.0 * a0 * a0 * scale))
                    ++rep.z_density_violations;
            }
        }
        for (std::size_t b = 0; b < fine.size(); ++b) {
            const double prob = static_cast<double>(became_new[b]) / static_cast<double>(omega_size);
            rep.min_new_point_probability = std::min(rep.min_new_point_probability, prob);
            if (prob * static_cast<double>(omega_size) < 1.0 - 1e-12)
                ++rep.new_point_probability_violations;
        }

        // d(z^{k+1}_beta, z^k_alpha) < A0^-3 delta^k / 5  =>  child  =>  distance < 5 A0^3 delta^k.
        const bool finest_next = k + 1 == nets.k_max();
        const Index inner = finest_next ? 1 : omega_size;
        const bool exhaustive = omega_size * inner <= 4096;
        const Index pairs = exhaustive ? omega_size * inner : std::max<Index>(num_samples, 1);
        Rng rng(stream_seed(seed, 0x636861696eULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(k))));
        for (Index t = 0; t < pairs; ++t) {
            const Index w = exhaustive ? t / inner : static_cast<Index>(rng.below(static_cast<std::uint64_t>(omega_size)));
            const Index v = exhaustive ? t % inner : static_cast<Index>(rng.below(static_cast<std::uint64_t>(inner)));
            const auto& zk = table.zpoints(k, w);
            const auto& par = table.parents(k, w);
            for (std::size_t b = 0; b < fine.size(); ++b) {
                const Index zb = finest_next ? fine[b] : table.zpoints(k + 1, v)[b];
                for (std::size_t a = 0; a < zk.size(); ++a) {
                    const double dist = space.d(zb, zk[a]);
                    const bool child = par[b] == static_cast<Index>(a);
                    if (dist < scale / (5.0 * a0 * a0 * a0) && !child)
                        ++rep.chain_implication_violations;
                    if (child && !(dist < 5.0 * a0 * a0 * a0 * scale))
                        ++rep.chain_implication_violations;
                }
            }
        }
    }

    // Sampled grids: partitions, centres and ball comparability.
    rep.samples = num_samples;
    for (Index s = 0; s < num_samples; ++s) {
        const Omega omega = sample_omega(labels, seed, static_cast<std::uint64_t>(s));
        std::vector<std::vector<Index>> parents;
        for (const auto& w : omega)
            parents.push_back(table.parents(w.k, omega_index(labels, w)));
        const auto cube_of = build_cubes(space, nets, parents);
        for (int k = k_min; k <= nets.k_max(); ++k) {
            const auto& pts = nets.level(k);
            const auto& cubes = cube_of[lvl(k, k_min)];
            const double scale = nets.scale(k);
            const std::vector<Index> z = k < nets.k_max()
                ? table.zpoints(k, omega_index(labels, omega[lvl(k, k_min)]))
                : pts;
            for (Index x = 0; x < n; ++x) {
                const Index c = cubes[static_cast<std::size_t>(x)];
                if (c < 0 || c >= static_cast<Index>(pts.size()))
                    ++rep.partition_violations;
                else if (k < nets.k_max()) {
                    const Index below = cube_of[lvl(k + 1, k_min)][static_cast<std::size_t>(x)];
                    if (parents[lvl(k, k_min)][static_cast<std::size_t>(below)] != c)
                        ++rep.partition_violations;
                }
            }
            for (std::size_t a = 0; a < pts.size(); ++a) {
                if (cubes[static_cast<std::size_t>(pts[a])] != static_cast<Index>(a))
                    ++rep.center_violations;
                for (Index y = 0; y < n; ++y) {
                    const bool inside = cubes[static_cast<std::size_t>(y)] == static_cast<Index>(a);
                    const double dz = space.d(z[a], y);
                    const double dx = space.d(pts[a], y);
                    if ((dz < scale / (6.0 * std::pow(a0, 5)) && !inside) || (inside && !(dz < 6.0 * std::pow(a0, 4) * scale)))
                        ++rep.z_ball_violations;
                    if ((dx < scale / (8.0 * std::pow(a0, 3)) && !inside) || (inside && dx > 8.0 * std::pow(a0, 5) * scale))
                        ++rep.x_ball_violations;
                }
            }
        }
    }
    return rep;
}

BoundaryStats boundary_layer_stats(const QuasiMetricSpace& space, const DyadicStructure& grid,
                                   const std::vector<double>& eps_grid, Index num_samples, std::uint64_t seed,
                                   int jobs)
{
    const auto& nets = grid.nets;
    const Index n = space.size();
    const int levels = nets.num_levels();
    const auto E = eps_grid.size();
    for (double e : eps_grid)
        if (!(e > 0.0 && e <= 1.0))
            throw Error(ErrorKind::BadParams, "eps values must lie in (0, 1]");
    if (num_samples < 1)
        throw Error(ErrorKind::BadParams, "at least one sample is required");

    BoundaryStats stats;
    stats.eps_grid = eps_grid;
    stats.num_samples = num_samples;
    if (num_samples < 100)
        stats.warning = "InsufficientSamples: fewer than 100 samples";

    const OmegaTable table(space, grid);
    std::vector<double> scales(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l)
        scales[static_cast<std::size_t>(l)] = nets.scale(nets.k_min() + l);

    // Per worker: hit counts per (x, level, eps), and per-sample totals per eps
    // with their cross products, all integral so merging is order-free.
    struct Acc {
        std::vector<std::int64_t> hits;
        std::vector<std::int64_t> total;
        std::vector<std::int64_t> cross;
    };
    const auto cells = static_cast<std::size_t>(n) * static_cast<std::size_t>(levels) * E;
    jobs = std::max(1, jobs);
    std::vector<Acc> accs(static_cast<std::size_t>(jobs));
    for (auto& a : accs) {
        a.hits.assign(cells, 0);
        a.total.assign(E, 0);
        a.cross.assign(E * E, 0);
    }

    parallel_chunks(num_samples, jobs, [&](int worker, Index begin, Index end) {
        Acc& acc = accs[static_cast<std::size_t>(worker)];
        std::vector<double> best(static_cast<std::size_t>(n) * static_cast<std::size_t>(levels));
        std::vector<std::int64_t> sample_count(E);
        for (Index s = begin; s < end; ++s) {
            const Omega omega = sample_omega(grid.labels, seed, static_cast<std::uint64_t>(s));
            std::vector<std::vector<Index>> parents;
            for (const auto& w : omega)
                parents.push_back(table.parents(w.k, omega_index(grid.labels, w)));
            const auto cube_of = build_cubes(space, nets, parents);

            // best[x, l]: distance from x to the nearest point first separated from x at level l.
            std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
            for (Index x = 0; x < n; ++x) {
                for (Index y = x + 1; y < n; ++y) {
                    int split = 0;
                    while (split < levels
                           && cube_of[static_cast<std::size_t>(split)][static_cast<std::size_t>(x)]
                               == cube_of[static_cast<std::size_t>(split)][static_cast<std::size_t>(y)])
                        ++split;
                    if (split == levels)
                        continue;
                    const double dxy = space.d(x, y);
                    auto& bx = best[static_cast<std::size_t>(x * levels + split)];
                    auto& by = best[static_cast<std::size_t>(y * levels + split)];
                    bx = std::min(bx, dxy);
                    by = std::min(by, dxy);
                }
            }
            std::fill(sample_count.begin(), sample_count.end(), 0);
            for (Index x = 0; x < n; ++x) {
                double to_complement = std::numeric_limits<double>::infinity();
                for (int l = 0; l < levels; ++l) {
                    to_complement = std::min(to_complement, best[static_cast<std::size_t>(x * levels + l)]);
                    for (std::size_t e = 0; e < E; ++e) {
                        if (to_complement < eps_grid[e] * scales[static_cast<std::size_t>(l)]) {
                            ++acc.hits[(static_cast<std::size_t>(x) * static_cast<std::size_t>(levels) + static_cast<std::size_t>(l)) * E + e];
                            ++sample_count[e];
                        }
                    }
                }
            }
            for (std::size_t e = 0; e < E; ++e) {
                acc.total[e] += sample_count[e];
                for (std::size_t f = 0; f < E; ++f)
                    acc.cross[e * E + f] += sample_count[e] * sample_count[f];
            }
        }
    });

    Acc sum = accs.front();
    for (std::size_t w = 1; w < accs.size(); ++w) {
        for (std::size_t i = 0; i < cells; ++i)
            sum.hits[i] += accs[w].hits[i];
        for (std::size_t e = 0; e < E; ++e)
            sum.total[e] += accs[w].total[e];
        for (std::size_t i = 0; i < E * E; ++i)
            sum.cross[i] += accs[w].cross[i];
    }

    const auto N = static_cast<double>(num_samples);
    for (Index x = 0; x < n; ++x) {
        for (int l = 0; l < levels; ++l) {
            for (std::size_t e = 0; e < E; ++e) {
                const double f = static_cast<double>(sum.hits[(static_cast<std::size_t>(x) * static_cast<std::size_t>(levels) + static_cast<std::size_t>(l)) * E + e]) / N;
                stats.rows.push_back({x, nets.k_min() + l, eps_grid[e], f, std::sqrt(f * (1.0 - f) / N)});
                if (e > 0 && eps_grid[e] >= eps_grid[e - 1] && f < stats.rows[stats.rows.size() - 2].freq)
                    stats.monotone = false;
            }
        }
    }

    // Mean over (x, k) and its Monte Carlo covariance across samples.
    const double cellsize = static_cast<double>(n) * levels;
    std::vector<double> mean(E);
    Eigen::MatrixXd cov(static_cast<Index>(E), static_cast<Index>(E));
    for (std::size_t e = 0; e < E; ++e)
        mean[e] = static_cast<double>(sum.total[e]) / N / cellsize;
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t f = 0; f < E; ++f) {
            const double exy = static_cast<double>(sum.cross[e * E + f]) / N / (cellsize * cellsize);
            const double c = num_samples > 1 ? (exy - mean[e] * mean[f]) * N / (N - 1.0) : 0.0;
            cov(static_cast<Index>(e), static_cast<Index>(f)) = c / N;
        }
    }
    stats.mean_freq = mean;
    for (std::size_t e = 0; e < E; ++e)
        stats.mean_stderr.push_back(std::sqrt(std::max(0.0, cov(static_cast<Index>(e), static_cast<Index>(e)))));

    std::vector<std::size_t> use;
    for (std::size_t e = 0; e < E; ++e)
        if (mean[e] > 0.0)
            use.push_back(e);
    stats.fitted_points = static_cast<Index>(use.size());
    if (use.size() >= 2) {
        double ubar = 0.0, vbar = 0.0;
        for (auto e : use) {
            ubar += std::log(eps_grid[e]);
            vbar += std::log(mean[e]);
        }
        ubar /= static_cast<double>(use.size());
        vbar /= static_cast<double>(use.size());
        double suu = 0.0, suv = 0.0;
        for (auto e : use) {
            const double du = std::log(eps_grid[e]) - ubar;
            suu += du * du;
            suv += du * (std::log(mean[e]) - vbar);
        }
        if (suu > 0.0) {
            stats.eta_hat = suv / suu;
            double var = 0.0;
            for (auto e : use) {
                for (auto f : use) {
                    const double we = (std::log(eps_grid[e]) - ubar) / suu;
                    const double wf = (std::log(eps_grid[f]) - ubar) / suu;
                    var += we * wf * cov(static_cast<Index>(e), static_cast<Index>(f)) / (mean[e] * mean[f]);
                }
            }
            stats.eta_stderr = std::sqrt(std::max(0.0, var));
        }
    } else if (stats.warning.empty()) {
        stats.warning = "fewer than two eps values with positive frequency; eta not fitted";
    }
    stats.eta_ci_low = stats.eta_hat - 1.96 * stats.eta_stderr;
    stats.eta_ci_high = stats.eta_hat + 1.96 * stats.eta_stderr;
    return stats;
}

} // namespace qmw
