#include "qmw/pipeline.hpp"
#include "qmw/space.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Overrides {
    std::string config, input, dist_csv, weights_csv, out, policy;
    std::optional<double> delta, nu, gamma;
    std::optional<std::uint64_t> seed;
    std::optional<qmw::Index> samples, grid_samples, trials;
    std::optional<int> jobs;
    std::vector<double> eps, r_grid, p_list;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--out", o.out, "artifact directory");
    cmd->add_option("--delta", o.delta, "scale ratio in (0,1)");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--samples", o.samples, "Monte Carlo samples for boundary layers");
    cmd->add_option("--grid-samples", o.grid_samples, "sampled grid coordinates for cube checks");
    cmd->add_option("--jobs", o.jobs, "worker threads");
    cmd->add_option("--policy", o.policy, "net policy: input_order | farthest_first");
    cmd->add_option("--eps", o.eps, "boundary epsilon grid");
    cmd->add_option("--r-grid", o.r_grid, "radii for the substitute inequality");
    cmd->add_option("--p", o.p_list, "Lp exponents");
    cmd->add_option("--nu", o.nu, "mass exponent nu");
    cmd->add_option("--gamma", o.gamma, "holes factor gamma");
    cmd->add_option("--trials", o.trials, "random vectors per exponent");
}

qmw::PipelineConfig resolve(const Overrides& o)
{
    qmw::PipelineConfig cfg;
    if (!o.config.empty())
        cfg = qmw::PipelineConfig::from_json(qmw::read_json(o.config));
    if (!o.input.empty()) {
        cfg.input = o.input;
        cfg.generator.reset();
        cfg.dist_csv.clear();
        cfg.weights_csv.clear();
    }
    if (!o.dist_csv.empty() || !o.weights_csv.empty()) {
        cfg.dist_csv = o.dist_csv;
        cfg.weights_csv = o.weights_csv;
        cfg.input.clear();
        cfg.generator.reset();
    }
    if (!o.out.empty())
        cfg.out_dir = o.out;
    if (!o.policy.empty())
        cfg.policy = o.policy;
    if (o.delta) cfg.delta = *o.delta;
    if (o.nu) cfg.nu = *o.nu;
    if (o.gamma) cfg.gamma = *o.gamma;
    if (o.seed) cfg.seed = *o.seed;
    if (o.samples) cfg.num_samples = *o.samples;
    if (o.grid_samples) cfg.grid_samples = *o.grid_samples;
    if (o.trials) cfg.trials = *o.trials;
    if (o.jobs) cfg.jobs = *o.jobs;
    if (!o.eps.empty()) cfg.eps_grid = o.eps;
    if (!o.r_grid.empty()) cfg.r_grid = o.r_grid;
    if (!o.p_list.empty()) cfg.p_list = o.p_list;
    return cfg;
}

// Positional parameters per kind: binary_tree depth; two_cluster n gap;
// snowflake n dim exponent; the rest n [dim].
qmw::GeneratorSpec generator_spec(const std::string& kind_name, const std::vector<double>& args, std::uint64_t seed)
{
    const auto kind = qmw::parse_example_kind(kind_name);
    if (!kind)
        throw qmw::Error(qmw::ErrorKind::BadParams, "unknown generator kind '" + kind_name + "'");
    qmw::GeneratorSpec g;
    g.kind = *kind;
    g.seed = seed;
    auto integer = [&](std::size_t i) {
        const double v = args.at(i);
        if (v != std::floor(v) || v < 0)
            throw qmw::Error(qmw::ErrorKind::BadParams, "expected a non-negative integer parameter");
        return static_cast<qmw::Index>(v);
    };
    if (args.empty())
        throw qmw::Error(qmw::ErrorKind::BadParams, "generator needs a size parameter");
    if (g.kind == qmw::ExampleKind::binary_tree) {
        g.params.depth = static_cast<int>(integer(0));
    } else {
        g.params.n = integer(0);
        if (args.size() > 1) {
            if (g.kind == qmw::ExampleKind::two_cluster)
                g.params.gap = args[1];
            else
                g.params.dim = static_cast<int>(integer(1));
        }
        if (args.size() > 2 && g.kind == qmw::ExampleKind::snowflake)
            g.params.exponent = args[2];
    }
    return g;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wavelets on finite quasi-metric measure spaces"};
    app.require_subcommand(1);
    Overrides o;

    std::string gen_kind, gen_out = "space.json";
    std::vector<double> gen_args;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen", "generate an example space");
    gen->add_option("kind", gen_kind, "cyclic | interval | binary_tree | point_cloud | koranyi_sphere | snowflake | two_cluster")
        ->required();
    gen->add_option("params", gen_args, "size and shape parameters");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output space JSON");

    auto* build = app.add_subcommand("build", "build nets, splines and the wavelet basis");
    add_common(build, o);
    build->add_option("--input", o.input, "space JSON");
    build->add_option("--dist-csv", o.dist_csv, "distance matrix CSV");
    build->add_option("--weights-csv", o.weights_csv, "weights CSV");
    auto* verify = app.add_subcommand("verify", "run every check on built artifacts");
    add_common(verify, o);
    std::string signal;
    auto* analyze = app.add_subcommand("analyze", "transform a signal and compute its square function");
    add_common(analyze, o);
    analyze->add_option("signal", signal, "signal file (JSON array or CSV column)")->required();
    auto* boundary = app.add_subcommand("boundary", "boundary-layer Monte Carlo");
    add_common(boundary, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qmw::kExitUsage;
    }

    try {
        if (gen->parsed())
            return qmw::cmd_gen(generator_spec(gen_kind, gen_args, gen_seed), gen_out, std::cerr);
        qmw::PipelineConfig cfg = resolve(o);
        if (!build->parsed() && cfg.input.empty() && cfg.dist_csv.empty() && !cfg.generator)
            cfg.input = (std::filesystem::path(cfg.out_dir) / "space.json").string();
        if (build->parsed())
            return qmw::cmd_build(cfg, std::cerr);
        if (verify->parsed())
            return qmw::cmd_verify(cfg, std::cerr);
        if (analyze->parsed())
            return qmw::cmd_analyze(cfg, signal, std::cerr);
        return qmw::cmd_boundary(cfg, std::cerr);
    } catch (const qmw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qmw::exit_code(e.kind());
    }
}
