#include "qmw/pipeline.hpp"

#include "qmw/decaymat.hpp"
#include "qmw/lpanalysis.hpp"
#include "qmw/randgrid.hpp"
#include "qmw/spline.hpp"
#include "qmw/wavelet.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace qmw {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "qmw 1.0.0";

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

Json provenance(const PipelineConfig& cfg)
{
    Json p;
    p["config_hash"] = cfg.hash();
    p["version"] = kVersion;
    p["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "."
        + std::to_string(EIGEN_MINOR_VERSION);
    return p;
}

Json check(const std::string& name, double value, double tolerance, bool pass)
{
    return Json{{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
}

Json check_le(const std::string& name, double value, double tolerance)
{
    return check(name, value, tolerance, value <= tolerance);
}

Json count_check(const std::string& name, Index value)
{
    return Json{{"name", name}, {"value", value}, {"tolerance", 0}, {"pass", value == 0}};
}

Json fit_json(const KernelFit& f)
{
    return Json{{"k", f.k}, {"C", f.C}, {"gamma", f.gamma}, {"pairs", f.pairs}};
}

Json space_summary(const QuasiMetricSpace& space)
{
    Json s;
    s["n"] = space.size();
    s["a0"] = space.a0();
    s["diam"] = space.diam();
    s["minsep"] = space.minsep();
    s["lipschitz"] = space.lipschitz();
    s["total_mass"] = space.total_mass();
    s["exponent_a"] = exponent_a(space);
    s["exponent_s"] = exponent_s(space);
    std::vector<double> radii;
    if (space.minsep() > 0.0)
        for (double r = space.minsep(); r <= 2.0 * space.diam(); r *= 2.0)
            radii.push_back(r);
    else
        radii.push_back(1.0);
    s["measure_doubling"] = measure_doubling_constant(space, radii);
    s["geometric_doubling"] = geometric_doubling_constant(space, radii);
    return s;
}

Json nets_report_json(const NetsReport& r)
{
    Json j;
    j["ok"] = r.ok();
    j["violations"] = r.violations;
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"k", l.k},
                              {"size", l.size},
                              {"separation_ratio", l.separation_ratio},
                              {"density_ratio", l.density_ratio},
                              {"nested", l.nested}});
    j["levels"] = std::move(levels);
    return j;
}

Json grid_report_json(const GridReport& g, const GridLabels& labels)
{
    return Json{{"L", labels.L},
                {"M", labels.M},
                {"omega_size", labels.omega_size()},
                {"samples", g.samples},
                {"reference_implication_violations", g.reference_implication_violations},
                {"self_parent_violations", g.self_parent_violations},
                {"ambiguous_parents", g.ambiguous_parents},
                {"center_violations", g.center_violations},
                {"partition_violations", g.partition_violations},
                {"new_point_probability_violations", g.new_point_probability_violations},
                {"min_new_point_probability", g.min_new_point_probability},
                {"z_separation_violations", g.z_separation_violations},
                {"z_density_violations", g.z_density_violations},
                {"neighbour_bound_violations", g.neighbour_bound_violations},
                {"chain_implication_violations", g.chain_implication_violations},
                {"z_ball_violations", g.z_ball_violations},
                {"x_ball_violations", g.x_ball_violations}};
}

Json spline_report_json(const SplineReport& r)
{
    return Json{{"partition_of_unity", r.partition_of_unity},
                {"interpolation", r.interpolation},
                {"refinement", r.refinement},
                {"column_stochastic", r.column_stochastic},
                {"range", r.range},
                {"self_transition", r.self_transition},
                {"outer_support_violations", r.outer_support_violations},
                {"inner_support_violations", r.inner_support_violations},
                {"holder_eta", r.holder_eta},
                {"holder_constant", r.holder_constant},
                {"holder_eta_fit", r.holder_eta_fit},
                {"holder_fit_constant", r.holder_fit_constant},
                {"holder_pairs", r.holder_pairs}};
}

// Exact facts that, when violated on a valid space, indicate delta is too coarse.
std::vector<std::string> delta_diagnostics(const NetsReport& nr, const GridReport& gr, const SplineReport& sr,
                                           double tol)
{
    std::vector<std::string> out;
    for (const auto& v : nr.violations)
        out.push_back("nets: " + v);
    if (!gr.exact_ok())
        out.push_back("grid: exact cube invariants violated");
    if (!sr.exact_ok(tol))
        out.push_back("splines: exact identities violated");
    if (sr.outer_support_violations > 0)
        out.push_back("splines: " + std::to_string(sr.outer_support_violations) + " values outside the outer support ball");
    if (sr.inner_support_violations > 0)
        out.push_back("splines: " + std::to_string(sr.inner_support_violations) + " values below 1 inside the inner ball");
    if (sr.self_transition > tol)
        out.push_back("splines: reference points are not always their own descendants");
    return out;
}

std::string level_file(const char* stem, int k) { return std::string(stem) + "_k" + std::to_string(k) + ".csv"; }

struct Built {
    QuasiMetricSpace space;
    DyadicStructure grid;
    SplineSystem splines;
    Mra mra;
};

Built rebuild(QuasiMetricSpace space, NestedNets nets)
{
    Built b{std::move(space), {}, {}, {}};
    b.grid = build_structure(b.space, std::move(nets));
    b.splines = compute_splines(b.space, b.grid);
    b.mra = build_mra(b.space, b.splines);
    return b;
}

Eigen::MatrixXd renorm_dist(const QuasiMetricSpace& space, const std::vector<Index>& pts, double scale)
{
    const auto m = static_cast<Index>(pts.size());
    Eigen::MatrixXd d(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
            d(i, j) = space.d(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) / scale;
    return d;
}

std::vector<double> json_doubles(const Json& j, const char* key)
{
    if (!j.is_array())
        throw Error(ErrorKind::BadParams, std::string(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) {
        if (!e.is_number())
            throw Error(ErrorKind::BadParams, std::string(key) + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::BadParams:
    case ErrorKind::BadDelta:
    case ErrorKind::BadExponent:
    case ErrorKind::IncompleteSigns:
    case ErrorKind::NonSquare:
    case ErrorKind::TooLarge:
    case ErrorKind::BadFormat:
        return kExitUsage;
    case ErrorKind::AxiomViolation:
    case ErrorKind::DegenerateSpace:
    case ErrorKind::ZeroBallMass:
        return kExitAxiom;
    case ErrorKind::DeltaTooLarge:
    case ErrorKind::RankDeficiency:
    case ErrorKind::OrderViolation:
        return kExitDeltaTooLarge;
    case ErrorKind::MissingArtifact:
        return kExitMissingArtifact;
    case ErrorKind::DimensionMismatch:
        return kExitDimensionMismatch;
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::NoConvergence:
        return kExitInvariant;
    }
    return kExitFailure;
}

Json generator_to_json(const GeneratorSpec& g)
{
    return Json{{"kind", std::string(to_string(g.kind))},
                {"n", g.params.n},
                {"dim", g.params.dim},
                {"depth", g.params.depth},
                {"exponent", g.params.exponent},
                {"perturb", g.params.perturb},
                {"gap", g.params.gap},
                {"seed", g.seed}};
}

GeneratorSpec generator_from_json(const Json& doc)
{
    if (!doc.is_object())
        throw Error(ErrorKind::BadParams, "generator must be an object");
    GeneratorSpec g;
    static const std::set<std::string> known{"kind", "n", "dim", "depth", "exponent", "perturb", "gap", "seed"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.contains(it.key()))
            throw Error(ErrorKind::BadParams, "unknown generator key '" + it.key() + "'");
    try {
        const auto kind = parse_example_kind(doc.at("kind").get<std::string>());
        if (!kind)
            throw Error(ErrorKind::BadParams, "unknown generator kind");
        g.kind = *kind;
        g.params.n = doc.value("n", g.params.n);
        g.params.dim = doc.value("dim", g.params.dim);
        g.params.depth = doc.value("depth", g.params.depth);
        g.params.exponent = doc.value("exponent", g.params.exponent);
        g.params.perturb = doc.value("perturb", g.params.perturb);
        g.params.gap = doc.value("gap", g.params.gap);
        g.seed = doc.value("seed", g.seed);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::BadParams, std::string("generator: ") + e.what());
    }
    return g;
}

Json PipelineConfig::to_json() const
{
    Json j;
    j["input"] = input;
    j["dist_csv"] = dist_csv;
    j["weights_csv"] = weights_csv;
    j["generator"] = generator ? generator_to_json(*generator) : Json(nullptr);
    j["delta"] = delta;
    j["seed"] = seed;
    j["num_samples"] = num_samples;
    j["grid_samples"] = grid_samples;
    j["eps_grid"] = eps_grid;
    j["r_grid"] = r_grid;
    j["p_list"] = p_list;
    j["trials"] = trials;
    j["nu"] = nu;
    j["gamma"] = gamma;
    j["policy"] = policy;
    j["tolerances"] = tolerances;
    j["out_dir"] = out_dir;
    j["jobs"] = jobs;
    return j;
}

PipelineConfig PipelineConfig::from_json(const Json& doc)
{
    if (!doc.is_object())
        throw Error(ErrorKind::BadParams, "config must be a JSON object");
    PipelineConfig c;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& key = it.key();
            const Json& v = it.value();
            if (key == "input")
                c.input = v.get<std::string>();
            else if (key == "dist_csv")
                c.dist_csv = v.get<std::string>();
            else if (key == "weights_csv")
                c.weights_csv = v.get<std::string>();
            else if (key == "generator")
                c.generator = v.is_null() ? std::nullopt : std::optional(generator_from_json(v));
            else if (key == "delta")
                c.delta = v.get<double>();
            else if (key == "seed")
                c.seed = v.get<std::uint64_t>();
            else if (key == "num_samples")
                c.num_samples = v.get<Index>();
            else if (key == "grid_samples")
                c.grid_samples = v.get<Index>();
            else if (key == "eps_grid")
                c.eps_grid = json_doubles(v, "eps_grid");
            else if (key == "r_grid")
                c.r_grid = json_doubles(v, "r_grid");
            else if (key == "p_list")
                c.p_list = json_doubles(v, "p_list");
            else if (key == "trials")
                c.trials = v.get<Index>();
            else if (key == "nu")
                c.nu = v.get<double>();
            else if (key == "gamma")
                c.gamma = v.get<double>();
            else if (key == "policy")
                c.policy = v.get<std::string>();
            else if (key == "tolerances") {
                for (auto t = v.begin(); t != v.end(); ++t) {
                    if (!c.tolerances.contains(t.key()))
                        throw Error(ErrorKind::BadParams, "unknown tolerance '" + t.key() + "'");
                    c.tolerances[t.key()] = t.value().get<double>();
                }
            } else if (key == "out_dir")
                c.out_dir = v.get<std::string>();
            else if (key == "jobs")
                c.jobs = v.get<int>();
            else
                throw Error(ErrorKind::BadParams, "unknown config key '" + key + "'");
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::BadParams, std::string("config: ") + e.what());
    }
    return c;
}

void PipelineConfig::validate() const
{
    if (!(delta > 0.0 && delta < 1.0))
        throw Error(ErrorKind::BadDelta, "delta must lie in (0, 1)");
    for (const auto& [name, v] : tolerances)
        if (!(v > 0.0))
            throw Error(ErrorKind::BadParams, "tolerance '" + name + "' must be positive");
    if (num_samples < 1 || grid_samples < 1 || trials < 1)
        throw Error(ErrorKind::BadParams, "sample and trial counts must be positive");
    if (jobs < 1)
        throw Error(ErrorKind::BadParams, "jobs must be >= 1");
    if (!parse_order_policy(policy))
        throw Error(ErrorKind::BadParams, "unknown policy '" + policy + "'");
    for (double e : eps_grid)
        if (!(e > 0.0 && e <= 1.0))
            throw Error(ErrorKind::BadParams, "eps_grid values must lie in (0, 1]");
    for (double r : r_grid)
        if (!(r > 0.0))
            throw Error(ErrorKind::BadParams, "r_grid values must be positive");
    for (double p : p_list)
        if (!(p > 1.0) || !std::isfinite(p))
            throw Error(ErrorKind::BadExponent, "p_list values must lie in (1, inf)");
    if (!(nu > 0.0) || !(gamma > 0.0))
        throw Error(ErrorKind::BadParams, "nu and gamma must be positive");
    const int sources = !input.empty() + (!dist_csv.empty() || !weights_csv.empty()) + generator.has_value();
    if (sources != 1)
        throw Error(ErrorKind::BadParams, "give exactly one of input, dist_csv/weights_csv, generator");
    if (!dist_csv.empty() != !weights_csv.empty())
        throw Error(ErrorKind::BadParams, "dist_csv and weights_csv go together");
}

std::string PipelineConfig::hash() const
{
    const std::string text = dump_json(to_json(), 0);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double PipelineConfig::tol(const std::string& name) const
{
    const auto it = tolerances.find(name);
    if (it == tolerances.end())
        throw Error(ErrorKind::BadParams, "unknown tolerance '" + name + "'");
    return it->second;
}

QuasiMetricSpace load_input_space(const PipelineConfig& cfg)
{
    if (cfg.generator)
        return gen_example(cfg.generator->kind, cfg.generator->params, cfg.generator->seed);
    if (!cfg.dist_csv.empty())
        return load_space_csv(cfg.dist_csv, cfg.weights_csv);
    return load_space(cfg.input);
}

int cmd_gen(const GeneratorSpec& spec, const fs::path& out, std::ostream& log)
{
    return guarded(log, [&] {
        const QuasiMetricSpace space = gen_example(spec.kind, spec.params, spec.seed);
        write_atomic(out, dump_json(space_to_json(space)));
        log << "wrote " << out.string() << " (" << space.size() << " points)\n";
        return kExitOk;
    });
}

int cmd_build(const PipelineConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        const fs::path out(cfg.out_dir);
        QuasiMetricSpace space = load_input_space(cfg);
        NestedNets nets = build_nets(space, cfg.delta, *parse_order_policy(cfg.policy));
        const NetsReport nr = verify_nets(space, nets);

        Json report;
        report["provenance"] = provenance(cfg);
        report["config"] = cfg.to_json();
        report["space"] = space_summary(space);
        report["nets"] = nets_report_json(nr);

        Built b = rebuild(space, nets);
        const GridReport gr = verify_grid(b.space, b.grid, cfg.grid_samples, cfg.seed);
        const SplineReport sr = verify_spline_theorem(b.space, b.grid.nets, b.splines);
        report["grid"] = grid_report_json(gr, b.grid.labels);
        report["splines"] = spline_report_json(sr);

        const auto diagnostics = delta_diagnostics(nr, gr, sr, cfg.tol("exact"));
        report["diagnostics"] = diagnostics;
        if (!diagnostics.empty()) {
            report["status"] = "DeltaTooLarge";
            write_atomic(out / "build_report.json", dump_json(report));
            for (const auto& d : diagnostics)
                log << "DeltaTooLarge: " << d << "\n";
            return kExitDeltaTooLarge;
        }

        const WaveletBasis basis = build_wavelets(b.space, b.grid.nets, b.splines, b.mra);
        Json wl = Json::array();
        for (const auto& l : basis.levels)
            wl.push_back(Json{{"k", l.k}, {"count", l.wavelets.rows()}, {"series_terms", l.series_terms},
                              {"series_gap", l.series_gap}});
        report["wavelets"] = Json{{"count", basis.count()}, {"levels", wl}};
        report["status"] = "ok";

        write_atomic(out / "space.json", dump_json(space_to_json(b.space)));
        write_atomic(out / "nets.json", dump_json(nets_to_json(b.grid.nets)));
        Json sh;
        sh["k_min"] = b.splines.k_min;
        sh["k_max"] = b.splines.k_max;
        Json files = Json::array();
        for (int k = b.splines.k_min; k <= b.splines.k_max; ++k) {
            write_atomic(out / level_file("splines", k), matrix_csv(b.splines.at(k)));
            Json f{{"k", k}, {"values", level_file("splines", k)}};
            if (k < b.splines.k_max) {
                write_atomic(out / level_file("transitions", k), matrix_csv(b.splines.transition(k)));
                f["transitions"] = level_file("transitions", k);
            }
            files.push_back(std::move(f));
        }
        sh["levels"] = std::move(files);
        write_atomic(out / "splines.json", dump_json(sh));
        write_atomic(out / "basis.json", dump_json(basis_header(basis)));
        write_atomic(out / "basis.csv", matrix_csv(basis.stacked()));
        write_atomic(out / "build_report.json", dump_json(report));
        log << "built " << basis.count() - 1 << " wavelets + constant on " << b.space.size() << " points in "
            << out.string() << "\n";
        return kExitOk;
    });
}

int cmd_verify(const PipelineConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        const fs::path out(cfg.out_dir);
        QuasiMetricSpace space = load_space(out / "space.json");
        NestedNets nets = nets_from_json(read_json(out / "nets.json"));
        const WaveletBasis basis = basis_from_files(read_json(out / "basis.json"), parse_matrix_csv(read_file(out / "basis.csv")));
        if (basis.constant.size() != space.size())
            throw Error(ErrorKind::DimensionMismatch, "basis length differs from space size");

        const double t_exact = cfg.tol("exact");
        const double t_lin = cfg.tol("linear");
        const double t_series = cfg.tol("series");
        const double t_tel = cfg.tol("telescoping");
        Json checks = Json::array();
        Json fits;

        const NetsReport nr = verify_nets(space, nets);
        checks.push_back(count_check("nets.violations", static_cast<Index>(nr.violations.size())));
        Built b = rebuild(std::move(space), std::move(nets));
        const QuasiMetricSpace& sp = b.space;
        const NestedNets& nt = b.grid.nets;
        const Index n = sp.size();

        const GridReport gr = verify_grid(sp, b.grid, cfg.grid_samples, cfg.seed);
        checks.push_back(count_check("grid.reference_implication", gr.reference_implication_violations));
        checks.push_back(count_check("grid.self_parent", gr.self_parent_violations));
        checks.push_back(count_check("grid.ambiguous_parents", gr.ambiguous_parents));
        checks.push_back(count_check("grid.center", gr.center_violations));
        checks.push_back(count_check("grid.partition", gr.partition_violations));
        checks.push_back(count_check("grid.new_point_probability", gr.new_point_probability_violations));

        const SplineReport sr = verify_spline_theorem(sp, nt, b.splines);
        checks.push_back(check_le("splines.partition_of_unity", sr.partition_of_unity, t_exact));
        checks.push_back(check_le("splines.interpolation", sr.interpolation, t_exact));
        checks.push_back(check_le("splines.refinement", sr.refinement, t_exact));
        checks.push_back(check_le("splines.column_stochastic", sr.column_stochastic, t_exact));
        checks.push_back(check_le("splines.range", sr.range, t_exact));
        checks.push_back(check_le("splines.self_transition", sr.self_transition, t_exact));
        checks.push_back(count_check("splines.outer_support", sr.outer_support_violations));
        checks.push_back(count_check("splines.inner_support", sr.inner_support_violations));

        const MraReport mr = verify_mra(sp, b.splines, b.mra, cfg.seed);
        checks.push_back(check_le("mra.biorthogonality", mr.biorthogonality, t_lin));
        checks.push_back(check("mra.riesz_min", mr.riesz_min, 0.0, mr.riesz_min > 0.0));
        checks.push_back(check_le("mra.nesting", mr.nesting, t_lin));
        checks.push_back(check_le("mra.projection_forms", mr.form_gap, t_lin));
        checks.push_back(check_le("mra.idempotence", mr.idempotence, t_lin));
        checks.push_back(check_le("mra.coarsest_constant", mr.coarsest_constant, t_lin));
        checks.push_back(check_le("mra.finest_identity", mr.finest_identity, t_lin));

        const WaveletReport wr = verify_wavelet_theorem(sp, nt, b.splines, basis, 20, cfg.seed);
        checks.push_back(check_le("wavelets.orthonormality", wr.orthonormality, t_lin));
        checks.push_back(check_le("wavelets.mean", wr.mean, t_lin));
        checks.push_back(check_le("wavelets.completeness", wr.completeness, t_lin));
        checks.push_back(check_le("wavelets.parseval", wr.parseval, t_lin));
        checks.push_back(check_le("wavelets.vk_orthogonality", wr.vk_orthogonality, t_lin));
        checks.push_back(check("wavelets.count", static_cast<double>(wr.count), static_cast<double>(wr.expected_count),
                               wr.count == wr.expected_count));
        const WaveletBasis fresh = build_wavelets(sp, nt, b.splines, b.mra);
        double reproduce = 0.0;
        if (fresh.count() == basis.count())
            reproduce = (fresh.stacked() - basis.stacked()).cwiseAbs().maxCoeff();
        else
            reproduce = std::numeric_limits<double>::infinity();
        checks.push_back(check_le("wavelets.reproducible", reproduce, t_lin));
        fits["wavelet_decay"] = Json{{"exponent_a", wr.decay_exponent}, {"gamma", wr.decay_gamma}, {"C", wr.decay_C},
                                     {"pairs", wr.decay_pairs}};
        fits["wavelet_holder"] = Json{{"eta", wr.holder_eta}, {"C", wr.holder_C}, {"pairs", wr.holder_pairs}};
        fits["spline_holder"] = Json{{"eta", sr.holder_eta_fit}, {"C", sr.holder_fit_constant},
                                     {"C_at_half", sr.holder_constant}, {"pairs", sr.holder_pairs}};

        // Gram decay, series inversion and chain constants.
        const double s_exp = exponent_s(sp);
        double neumann_gap = 0.0, series_gap = 0.0;
        Index gram_nondecay = 0, inverse_nondecay = 0;
        bool power_dominates = true;
        Json gram_fits = Json::array();
        for (int k = b.mra.k_min; k <= b.mra.k_max; ++k) {
            const Eigen::MatrixXd& g = b.mra.at(k).gram;
            const Eigen::MatrixXd dk = renorm_dist(sp, nt.level(k), nt.scale(k));
            power_dominates = power_dominates && separated_power_dominates(dk, s_exp);
            const DecayFit gf = decay_certificate(g, dk, 1.0);
            const Eigen::MatrixXd inv = dense_inverse(g);
            const DecayFit inf = decay_certificate(inv, dk, s_exp);
            gram_nondecay += !gf.decays();
            inverse_nondecay += !inf.decays();
            neumann_gap = std::max(neumann_gap, (neumann_inverse(g).value - inv).cwiseAbs().maxCoeff());
            gram_fits.push_back(Json{{"k", k}, {"gram_c", gf.c}, {"gram_C", gf.C}, {"inverse_c", inf.c},
                                     {"inverse_C", inf.C}, {"pairs", gf.pairs}, {"negligible", gf.negligible}});
        }
        for (const auto& l : fresh.levels)
            series_gap = std::max(series_gap, l.series_gap);
        checks.push_back(count_check("decay.gram_nondecaying_levels", gram_nondecay));
        checks.push_back(count_check("decay.inverse_nondecaying_levels", inverse_nondecay));
        checks.push_back(check_le("decay.neumann_vs_dense", neumann_gap, t_series));
        checks.push_back(check_le("decay.inverse_sqrt_vs_spectral", series_gap, t_series));
        checks.push_back(check("decay.separated_power", power_dominates ? 0.0 : 1.0, 0.0, power_dominates));
        fits["gram_decay"] = std::move(gram_fits);

        std::vector<Index> subset;
        for (Index i = 0; i < std::min<Index>(n, 10); ++i)
            subset.push_back(i);
        const Eigen::MatrixXd sub = renorm_dist(sp, subset, 1.0);
        const double sub_a0 = quasi_triangle_constant(sub);
        const ChainConstants cc = chain_constants(sub, 8, sub_a0);
        checks.push_back(check("chain.kappa1", cc.kappa.front(), 1.0, cc.kappa1_is_one));
        checks.push_back(check("chain.kappa2", cc.kappa.size() > 1 ? cc.kappa[1] : 1.0, sub_a0, cc.kappa2_le_a0));
        checks.push_back(check("chain.power_bound", cc.kappa.back(), std::pow(sub_a0, 1.0 + std::log2(8.0)), cc.power_bound));
        fits["chain_kappa"] = cc.kappa;

        // Littlewood-Paley.
        const LPSystem lp = build_lp(sp, nt, b.splines, b.mra, basis);
        const KernelReport kr = kernel_estimates(sp, nt, lp, s_exp, exponent_a(sp));
        checks.push_back(check_le("lp.p_row_sum", kr.p_row_sum, t_lin));
        checks.push_back(check_le("lp.q_row_sum", kr.q_row_sum, t_lin));
        checks.push_back(check_le("lp.telescoping", kr.telescoping, t_tel));
        checks.push_back(check_le("lp.symmetry", kr.symmetry, t_lin));
        Json kfits;
        kfits["p_size"] = fit_json(kr.p_size_all);
        kfits["q_holes"] = fit_json(kr.q_holes_all);
        Json per_p = Json::array(), per_q = Json::array();
        for (const auto& f : kr.p_size)
            per_p.push_back(fit_json(f));
        for (const auto& f : kr.q_holes)
            per_q.push_back(fit_json(f));
        kfits["p_size_levels"] = std::move(per_p);
        kfits["q_holes_levels"] = std::move(per_q);
        kfits["p_regularity_eta"] = kr.p_regularity_eta;
        kfits["p_regularity_C"] = kr.p_regularity_C;
        kfits["nonpositive_fits"] = kr.nonpositive_fits;
        kfits["s_exponent"] = kr.s_exponent;
        kfits["a_exponent"] = kr.a_exponent;
        fits["kernels"] = std::move(kfits);

        const CzBound cz = cz_kernel_bound(sp, basis);
        fits["cz"] = Json{{"constant", cz.constant}, {"x", cz.x}, {"y", cz.y}};

        if (n > 1) {
            Json ratios = Json::array();
            for (double p : cfg.p_list) {
                const LpRatios r = lp_equivalence(sp, lp, p, cfg.trials, cfg.seed);
                ratios.push_back(Json{{"p", p}, {"lower", r.lower}, {"upper", r.upper}, {"trials", r.trials}});
                if (p == 2.0)
                    checks.push_back(check_le("lp.parseval", std::max(std::abs(r.lower - 1.0), std::abs(r.upper - 1.0)), t_lin));
            }
            fits["lp_ratios"] = std::move(ratios);

            const Eigen::MatrixXd t = random_sign_operator(sp, basis, random_signs(basis, cfg.seed));
            double iso = 0.0;
            for (Index trial = 0; trial < 20; ++trial) {
                const Eigen::VectorXd f = random_mean_zero(sp, cfg.seed ^ 0x9e37u, static_cast<std::uint64_t>(trial));
                iso = std::max(iso, std::abs(sp.lp_norm(t * f, 2.0) / sp.lp_norm(f, 2.0) - 1.0));
            }
            checks.push_back(check_le("lp.random_sign_isometry", iso, t_lin));
        }

        const SubstituteReport sub_rep = substitute_inequality_check(sp, nt, lp, cfg.nu, cfg.gamma, exponent_a(sp), cfg.r_grid);
        fits["substitute"] = Json{{"nu", sub_rep.nu},
                                  {"gamma", sub_rep.gamma},
                                  {"a", sub_rep.a},
                                  {"max_substitute_ratio", sub_rep.max_substitute_ratio},
                                  {"max_unrestricted_ratio", sub_rep.max_unrestricted_ratio},
                                  {"min_stagnant_factor", sub_rep.min_stagnant_factor},
                                  {"stagnant_rows", sub_rep.stagnant_rows}};
        const GrowthSequence gs = growth_sequence(sp, nt, 0, n > 1 ? sp.minsep() : 1.0);
        fits["growth_sequence"] = Json{{"levels", gs.levels}, {"epsilon", gs.epsilon},
                                       {"mass_constant", gs.mass_constant}, {"holes_constant", gs.holes_constant}};

        bool all_pass = true;
        for (const auto& c : checks)
            all_pass = all_pass && c["pass"].get<bool>();

        Json report;
        report["provenance"] = provenance(cfg);
        report["config"] = cfg.to_json();
        report["space"] = space_summary(sp);
        report["nets"] = nets_report_json(nr);
        report["grid"] = grid_report_json(gr, b.grid.labels);
        report["splines"] = spline_report_json(sr);
        report["checks"] = std::move(checks);
        report["fits"] = std::move(fits);
        report["all_exact_pass"] = all_pass;
        write_atomic(out / "verify_report.json", dump_json(report));
        for (const auto& c : report["checks"])
            if (!c["pass"].get<bool>())
                log << "FAIL " << c["name"].get<std::string>() << "\n";
        log << (all_pass ? "verify: all exact invariants pass\n" : "verify: exact invariant failures\n");
        return all_pass ? kExitOk : kExitInvariant;
    });
}

int cmd_analyze(const PipelineConfig& cfg, const fs::path& signal, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        const fs::path out(cfg.out_dir);
        QuasiMetricSpace space = load_space(out / "space.json");
        NestedNets nets = nets_from_json(read_json(out / "nets.json"));
        const WaveletBasis basis = basis_from_files(read_json(out / "basis.json"), parse_matrix_csv(read_file(out / "basis.csv")));
        const Eigen::VectorXd f = parse_vector(read_file(signal));
        if (f.size() != space.size() || basis.constant.size() != space.size())
            throw Error(ErrorKind::DimensionMismatch, "signal has " + std::to_string(f.size()) + " values, space has "
                                                          + std::to_string(space.size()) + " points");
        Built b = rebuild(std::move(space), std::move(nets));
        const QuasiMetricSpace& sp = b.space;
        const Eigen::VectorXd coef = wavelet_transform(sp, basis, f);

        std::string csv = "index,k,center,coefficient\n";
        csv += "0,,," + format_csv_double(coef(0)) + "\n";
        Index row = 1;
        for (const auto& l : basis.levels)
            for (Index bi = 0; bi < l.wavelets.rows(); ++bi, ++row)
                csv += std::to_string(row) + "," + std::to_string(l.k) + ","
                    + std::to_string(l.centers[static_cast<std::size_t>(bi)]) + "," + format_csv_double(coef(row)) + "\n";
        write_atomic(out / "coefficients.csv", csv);

        const LPSystem lp = build_lp(sp, b.grid.nets, b.splines, b.mra, basis);
        const Eigen::VectorXd sf = square_function(sp, lp, f);
        std::string scsv = "x,square_function\n";
        for (Index x = 0; x < sf.size(); ++x)
            scsv += std::to_string(x) + "," + format_csv_double(sf(x)) + "\n";
        write_atomic(out / "square_function.csv", scsv);

        const double norm2 = sp.inner(f, f);
        const double parseval = norm2 > 0.0 ? std::abs(coef.squaredNorm() - norm2) / norm2 : std::abs(coef.squaredNorm());
        const Eigen::VectorXd centered = f.array() - sp.weights().dot(f) / sp.total_mass();
        Json ratios = Json::array();
        for (double p : cfg.p_list) {
            const double fn = sp.lp_norm(centered, p);
            ratios.push_back(Json{{"p", p}, {"ratio", fn > 0.0 ? sp.lp_norm(sf, p) / fn : 0.0}});
        }
        const double roundtrip = (inverse_transform(basis, coef) - f).cwiseAbs().maxCoeff();

        Json report;
        report["provenance"] = provenance(cfg);
        report["signal"] = signal.filename().string();
        report["parseval_relative_error"] = parseval;
        report["roundtrip_error"] = roundtrip;
        report["mean_coefficient"] = coef(0);
        report["square_function_ratios"] = std::move(ratios);
        write_atomic(out / "analyze_report.json", dump_json(report));
        log << "parseval relative error " << format_double(parseval) << "\n";
        return parseval <= cfg.tol("linear") ? kExitOk : kExitInvariant;
    });
}

int cmd_boundary(const PipelineConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        const fs::path out(cfg.out_dir);
        QuasiMetricSpace space = load_space(out / "space.json");
        NestedNets nets = nets_from_json(read_json(out / "nets.json"));
        const DyadicStructure grid = build_structure(space, std::move(nets));
        const BoundaryStats st = boundary_layer_stats(space, grid, cfg.eps_grid, cfg.num_samples, cfg.seed, cfg.jobs);

        std::string csv = "x,k,eps,freq,stderr\n";
        for (const auto& r : st.rows)
            csv += std::to_string(r.x) + "," + std::to_string(r.k) + "," + format_csv_double(r.eps) + ","
                + format_csv_double(r.freq) + "," + format_csv_double(r.stderr_) + "\n";
        write_atomic(out / "boundary.csv", csv);

        Json report;
        report["provenance"] = provenance(cfg);
        report["eps_grid"] = st.eps_grid;
        report["mean_freq"] = st.mean_freq;
        report["mean_stderr"] = st.mean_stderr;
        report["eta_hat"] = st.eta_hat;
        report["eta_stderr"] = st.eta_stderr;
        report["eta_ci"] = {st.eta_ci_low, st.eta_ci_high};
        report["fitted_points"] = st.fitted_points;
        report["monotone"] = st.monotone;
        report["num_samples"] = st.num_samples;
        report["warning"] = st.warning;
        write_atomic(out / "boundary_report.json", dump_json(report));
        if (!st.warning.empty())
            log << "warning: " << st.warning << "\n";
        log << "eta_hat " << format_double(st.eta_hat) << " [" << format_double(st.eta_ci_low) << ", "
            << format_double(st.eta_ci_high) << "]\n";
        return kExitOk;
    });
}

} // namespace qmw
