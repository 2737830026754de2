#pragma once

// Serialization: JSON documents with 17 significant digits, CSV matrices,
// atomic file writes, and the on-disk forms of spaces, nets and bases.

#include "qmw/nets.hpp"
#include "qmw/space.hpp"
#include "qmw/wavelet.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace qmw {

using Json = nlohmann::json;

/// "%.17g"; non-finite values become "null" (JSON) or "nan"/"inf"/"-inf" (CSV).
std::string format_double(double v);
std::string format_csv_double(double v);

/// Deterministic JSON text: sorted keys, fixed float format, trailing newline.
std::string dump_json(const Json& doc, int indent = 2);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Throws Error{MissingArtifact} when absent.
std::string read_file(const std::filesystem::path& path);
/// Throws Error{MissingArtifact} or Error{BadFormat}.
Json read_json(const std::filesystem::path& path);

std::string matrix_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd parse_matrix_csv(std::string_view text);
/// One value per line (CSV) or a JSON array, picked by the first character.
Eigen::VectorXd parse_vector(std::string_view text);

Json space_to_json(const QuasiMetricSpace& space);
QuasiMetricSpace space_from_json(const Json& doc);
QuasiMetricSpace load_space(const std::filesystem::path& path);
QuasiMetricSpace load_space_csv(const std::filesystem::path& dist, const std::filesystem::path& weights);

Json nets_to_json(const NestedNets& nets);
NestedNets nets_from_json(const Json& doc);

/// Header describing levels, centers and masses; values go to a CSV matrix
/// whose rows follow WaveletBasis::stacked().
Json basis_header(const WaveletBasis& basis);
WaveletBasis basis_from_files(const Json& header, const Eigen::MatrixXd& values);

} // namespace qmw
