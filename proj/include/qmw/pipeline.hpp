#pragma once

// Command implementations behind the qmw executable. Each returns a process
// exit code; errors are caught and mapped through exit_code().

#include "qmw/error.hpp"
#include "qmw/io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qmw {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAxiom = 3;
inline constexpr int kExitDeltaTooLarge = 4;
inline constexpr int kExitMissingArtifact = 5;
inline constexpr int kExitDimensionMismatch = 6;
inline constexpr int kExitInvariant = 7;

int exit_code(ErrorKind kind) noexcept;

struct GeneratorSpec {
    ExampleKind kind = ExampleKind::cyclic;
    ExampleParams params;
    std::uint64_t seed = 1;
};

Json generator_to_json(const GeneratorSpec& g);
GeneratorSpec generator_from_json(const Json& doc);

struct PipelineConfig {
    std::string input;        ///< space JSON
    std::string dist_csv;     ///< alternative CSV pair
    std::string weights_csv;
    std::optional<GeneratorSpec> generator;
    double delta = 0.5;
    std::uint64_t seed = 1;
    Index num_samples = 2000; ///< boundary Monte Carlo samples
    Index grid_samples = 64;  ///< sampled omega for grid checks
    std::vector<double> eps_grid{0.0625, 0.125, 0.25, 0.5, 1.0};
    std::vector<double> r_grid;  ///< empty: delta^k over the levels
    std::vector<double> p_list{1.5, 2.0, 4.0};
    Index trials = 200;
    double nu = 1.0;
    double gamma = 1.0;
    std::string policy = "input_order";
    std::map<std::string, double> tolerances{
        {"exact", 1e-12}, {"linear", 1e-10}, {"series", 1e-8}, {"telescoping", 1e-12}};
    std::string out_dir = "qmw_out";
    int jobs = 1;

    Json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static PipelineConfig from_json(const Json& doc);
    /// Throws Error{BadParams} / Error{BadDelta}.
    void validate() const;
    /// FNV-1a of the canonical JSON form, as 16 hex digits.
    std::string hash() const;
    double tol(const std::string& name) const;
};

QuasiMetricSpace load_input_space(const PipelineConfig& cfg);

int cmd_gen(const GeneratorSpec& spec, const std::filesystem::path& out, std::ostream& log);
int cmd_build(const PipelineConfig& cfg, std::ostream& log);
int cmd_verify(const PipelineConfig& cfg, std::ostream& log);
int cmd_analyze(const PipelineConfig& cfg, const std::filesystem::path& signal, std::ostream& log);
int cmd_boundary(const PipelineConfig& cfg, std::ostream& log);

} // namespace qmw
