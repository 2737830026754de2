#include "support.hpp"

#include "qmw/error.hpp"
#include "qmw/io.hpp"
#include "qmw/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace qmw;
using namespace qmw::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("qmw_pipe_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig config_for(const fs::path& space_file, const fs::path& out)
{
    PipelineConfig cfg;
    cfg.input = space_file.string();
    cfg.out_dir = out.string();
    cfg.trials = 40;
    return cfg;
}

fs::path generate(const fs::path& dir, ExampleKind kind, Index n, std::uint64_t seed = 1)
{
    GeneratorSpec g;
    g.kind = kind;
    g.params.n = n;
    g.seed = seed;
    const fs::path file = dir / (std::string(to_string(kind)) + std::to_string(n) + ".json");
    std::ostringstream log;
    REQUIRE(cmd_gen(g, file, log) == kExitOk);
    return file;
}

const Json* find_check(const Json& report, const std::string& name)
{
    for (const auto& c : report["checks"])
        if (c["name"] == name)
            return &c;
    return nullptr;
}

} // namespace

TEST_CASE("exit codes per failure class")
{
    CHECK(exit_code(ErrorKind::BadParams) == kExitUsage);
    CHECK(exit_code(ErrorKind::BadDelta) == kExitUsage);
    CHECK(exit_code(ErrorKind::AxiomViolation) == kExitAxiom);
    CHECK(exit_code(ErrorKind::DeltaTooLarge) == kExitDeltaTooLarge);
    CHECK(exit_code(ErrorKind::RankDeficiency) == kExitDeltaTooLarge);
    CHECK(exit_code(ErrorKind::MissingArtifact) == kExitMissingArtifact);
    CHECK(exit_code(ErrorKind::DimensionMismatch) == kExitDimensionMismatch);
    CHECK(exit_code(ErrorKind::NoConvergence) == kExitInvariant);
    CHECK(exit_code(ErrorKind::NotPositiveDefinite) == kExitInvariant);
}

TEST_CASE("config round trip, validation and hashing")
{
    PipelineConfig cfg;
    cfg.input = "space.json";
    cfg.delta = 0.25;
    cfg.p_list = {1.5, 3.0};
    cfg.tolerances["linear"] = 1e-9;
    const PipelineConfig back = PipelineConfig::from_json(Json::parse(dump_json(cfg.to_json())));
    CHECK(dump_json(back.to_json()) == dump_json(cfg.to_json()));
    CHECK(back.hash() == cfg.hash());
    CHECK(cfg.hash().size() == 16);
    PipelineConfig other = cfg;
    other.delta = 0.3;
    CHECK(other.hash() != cfg.hash());
    CHECK_NOTHROW(cfg.validate());

    auto expect_kind = [](PipelineConfig c, ErrorKind kind) {
        try {
            c.validate();
            FAIL("expected validation failure");
        } catch (const Error& e) {
            CHECK(e.kind() == kind);
        }
    };
    PipelineConfig bad = cfg;
    bad.delta = 1.0;
    expect_kind(bad, ErrorKind::BadDelta);
    bad = cfg;
    bad.tolerances["exact"] = 0.0;
    expect_kind(bad, ErrorKind::BadParams);
    bad = cfg;
    bad.input.clear();
    expect_kind(bad, ErrorKind::BadParams);
    bad = cfg;
    bad.p_list = {1.0};
    expect_kind(bad, ErrorKind::BadExponent);

    CHECK_THROWS_AS(PipelineConfig::from_json(Json{{"unknown_key", 1}}), Error);
    CHECK_THROWS_AS(PipelineConfig::from_json(Json{{"tolerances", {{"bogus", 1.0}}}}), Error);
    const auto gen = PipelineConfig::from_json(Json{{"generator", {{"kind", "cyclic"}, {"n", 12}}}});
    REQUIRE(gen.generator);
    CHECK(gen.generator->params.n == 12);
    CHECK(load_input_space(gen).size() == 12);
}

TEST_CASE("gen writes deterministic space files")
{
    const fs::path dir = scratch("gen");
    const auto c8 = load_space(generate(dir, ExampleKind::cyclic, 8));
    CHECK(c8.size() == 8);
    CHECK(c8.dist().rows() == 8);
    CHECK(load_space(generate(dir, ExampleKind::interval, 1)).size() == 1);
    GeneratorSpec g;
    g.kind = ExampleKind::koranyi_sphere;
    g.params.n = 64;
    g.params.dim = 2;
    g.seed = 7;
    std::ostringstream log;
    REQUIRE(cmd_gen(g, dir / "k1.json", log) == 0);
    REQUIRE(cmd_gen(g, dir / "k2.json", log) == 0);
    CHECK(read_file(dir / "k1.json") == read_file(dir / "k2.json"));
    g.params.n = 0;
    CHECK(cmd_gen(g, dir / "bad.json", log) == kExitUsage);
}

TEST_CASE("build: cyclic(8), a single point, and delta too large")
{
    const fs::path dir = scratch("build");
    std::ostringstream log;
    const auto cfg = config_for(generate(dir, ExampleKind::cyclic, 8), dir / "c8");
    REQUIRE(cmd_build(cfg, log) == kExitOk);
    const Json header = read_json(dir / "c8" / "basis.json");
    CHECK(header["count"] == 8);
    Index wavelets = 0;
    for (const auto& l : header["levels"])
        wavelets += static_cast<Index>(l["centers"].size());
    CHECK(wavelets == 7);
    CHECK(parse_matrix_csv(read_file(dir / "c8" / "basis.csv")).rows() == 8);
    for (const char* f : {"space.json", "nets.json", "splines.json", "build_report.json"})
        CHECK(fs::exists(dir / "c8" / f));

    const auto one = config_for(generate(dir, ExampleKind::interval, 1), dir / "one");
    REQUIRE(cmd_build(one, log) == kExitOk);
    CHECK(read_json(dir / "one" / "basis.json")["count"] == 1);
    CHECK(cmd_verify(one, log) == kExitOk);

    auto hard = config_for(generate(dir, ExampleKind::interval, 64), dir / "hard");
    hard.delta = 0.99;
    CHECK(cmd_build(hard, log) == kExitDeltaTooLarge);
    const Json rep = read_json(dir / "hard" / "build_report.json");
    CHECK(rep["status"] == "DeltaTooLarge");
    CHECK_FALSE(rep["diagnostics"].empty());
    CHECK_FALSE(fs::exists(dir / "hard" / "basis.csv"));

    auto missing = config_for(dir / "nope.json", dir / "nope");
    CHECK(cmd_build(missing, log) == kExitMissingArtifact);
    auto bad_delta = cfg;
    bad_delta.delta = 1.5;
    CHECK(cmd_build(bad_delta, log) == kExitUsage);
}

TEST_CASE("verify: passes on cyclic(16), fails on a corrupted basis")
{
    const fs::path dir = scratch("verify");
    std::ostringstream log;
    const auto cfg = config_for(generate(dir, ExampleKind::cyclic, 16), dir / "c16");
    REQUIRE(cmd_build(cfg, log) == kExitOk);
    CHECK(cmd_verify(cfg, log) == kExitOk);
    const Json rep = read_json(dir / "c16" / "verify_report.json");
    CHECK(rep["all_exact_pass"] == true);
    for (const auto& c : rep["checks"]) {
        CHECK(c.contains("value"));
        CHECK(c.contains("tolerance"));
    }
    CHECK(rep["fits"]["wavelet_decay"].contains("gamma"));
    CHECK(rep["fits"]["wavelet_decay"].contains("C"));
    CHECK(rep["fits"]["wavelet_holder"].contains("eta"));
    CHECK(rep["fits"]["wavelet_decay"].contains("pairs"));
    CHECK(rep["provenance"]["config_hash"] == cfg.hash());

    Eigen::MatrixXd basis = parse_matrix_csv(read_file(dir / "c16" / "basis.csv"));
    basis(3, 2) += 0.25;
    write_atomic(dir / "c16" / "basis.csv", matrix_csv(basis));
    CHECK(cmd_verify(cfg, log) == kExitInvariant);
    const Json broken = read_json(dir / "c16" / "verify_report.json");
    const Json* orth = find_check(broken, "wavelets.orthonormality");
    REQUIRE(orth);
    CHECK((*orth)["pass"] == false);

    CHECK(cmd_verify(config_for(dir / "x.json", dir / "empty"), log) == kExitMissingArtifact);
}

TEST_CASE("analyze: coefficients, square function and Parseval")
{
    const fs::path dir = scratch("analyze");
    std::ostringstream log;
    const auto cfg = config_for(generate(dir, ExampleKind::interval, 32), dir / "i32");
    REQUIRE(cmd_build(cfg, log) == kExitOk);
    const Eigen::MatrixXd basis = parse_matrix_csv(read_file(dir / "i32" / "basis.csv"));

    auto coefficients = [&]() {
        const std::string text = read_file(dir / "i32" / "coefficients.csv");
        std::vector<double> out;
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line))
            out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
        return out;
    };

    write_atomic(dir / "flat.csv", matrix_csv(Eigen::VectorXd::Constant(32, 2.0)));
    REQUIRE(cmd_analyze(cfg, dir / "flat.csv", log) == kExitOk);
    const auto flat = coefficients();
    REQUIRE(flat.size() == 32);
    for (std::size_t i = 1; i < flat.size(); ++i)
        CHECK(std::abs(flat[i]) <= 1e-12);

    write_atomic(dir / "psi.csv", matrix_csv(basis.row(9).transpose()));
    REQUIRE(cmd_analyze(cfg, dir / "psi.csv", log) == kExitOk);
    const auto psi = coefficients();
    for (std::size_t i = 0; i < psi.size(); ++i)
        CHECK(std::abs(psi[i] - (i == 9 ? 1.0 : 0.0)) <= 1e-10);

    Eigen::VectorXd noise(32);
    for (Index i = 0; i < 32; ++i)
        noise(i) = std::sin(1.7 * static_cast<double>(i * i) + 0.3);
    write_atomic(dir / "noise.csv", matrix_csv(noise));
    REQUIRE(cmd_analyze(cfg, dir / "noise.csv", log) == kExitOk);
    const Json rep = read_json(dir / "i32" / "analyze_report.json");
    CHECK(rep["parseval_relative_error"].get<double>() <= 1e-10);
    const std::string sf = read_file(dir / "i32" / "square_function.csv");
    CHECK(sf.rfind("x,square_function\n", 0) == 0);
    CHECK(std::count(sf.begin(), sf.end(), '\n') == 33);

    write_atomic(dir / "short.csv", matrix_csv(Eigen::VectorXd::Ones(31)));
    CHECK(cmd_analyze(cfg, dir / "short.csv", log) == kExitDimensionMismatch);
}

TEST_CASE("boundary: coarsest-only space and Monte Carlo scaling")
{
    const fs::path dir = scratch("boundary");
    std::ostringstream log;
    const auto one = config_for(generate(dir, ExampleKind::interval, 1), dir / "one");
    REQUIRE(cmd_build(one, log) == kExitOk);
    REQUIRE(cmd_boundary(one, log) == kExitOk);
    for (const auto& f : read_json(dir / "one" / "boundary_report.json")["mean_freq"])
        CHECK(f.get<double>() == 0.0);

    auto cfg = config_for(generate(dir, ExampleKind::interval, 64), dir / "i64");
    cfg.delta = 0.1;
    REQUIRE(cmd_build(cfg, log) == kExitOk);
    cfg.num_samples = 2000;
    REQUIRE(cmd_boundary(cfg, log) == kExitOk);
    const Json small = read_json(dir / "i64" / "boundary_report.json");
    cfg.num_samples = 4000;
    REQUIRE(cmd_boundary(cfg, log) == kExitOk);
    const Json large = read_json(dir / "i64" / "boundary_report.json");
    Index compared = 0;
    for (std::size_t i = 0; i < small["mean_stderr"].size(); ++i) {
        const double a = small["mean_stderr"][i].get<double>();
        const double b = large["mean_stderr"][i].get<double>();
        if (a > 0.0) {
            ++compared;
            CHECK(b / a == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.15));
        }
    }
    CHECK(compared > 0);
    const std::string csv = read_file(dir / "i64" / "boundary.csv");
    CHECK(csv.rfind("x,k,eps,freq,stderr\n", 0) == 0);
    CHECK(cmd_boundary(config_for(dir / "x.json", dir / "absent"), log) == kExitMissingArtifact);
}

TEST_CASE("reports are byte-identical across runs")
{
    const fs::path dir = scratch("determinism");
    std::ostringstream log;
    const auto cfg = config_for(generate(dir, ExampleKind::koranyi_sphere, 24), dir / "out");
    const std::vector<std::string> files{"build_report.json", "verify_report.json", "basis.csv", "nets.json"};
    auto run = [&] {
        REQUIRE(cmd_build(cfg, log) == kExitOk);
        cmd_verify(cfg, log);
        std::vector<std::string> bytes;
        for (const auto& f : files)
            bytes.push_back(read_file(dir / "out" / f));
        fs::remove_all(dir / "out");
        return bytes;
    };
    const auto first = run();
    const auto second = run();
    for (std::size_t i = 0; i < files.size(); ++i)
        CHECK_MESSAGE(first[i] == second[i], files[i]);
}
