#include "qmw/io.hpp"

#include "qmw/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qmw {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    if (!std::isfinite(v))
        return "null";
    if (v == 0.0)
        return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
    return s;
}

std::string format_csv_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(const Json& j, int indent, int depth, std::string& out)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            emit(it.value(), indent, depth + 1, out);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ", ";
                emit(j[i], indent, depth + 1, out);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                out += ",\n";
            out += pad;
            emit(j[i], indent, depth + 1, out);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += j.dump();
        return;
    }
}

} // namespace

std::string dump_json(const Json& doc, int indent)
{
    std::string out;
    emit(doc, indent, 0, out);
    out += "\n";
    return out;
}

void write_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw Error(ErrorKind::BadParams, "cannot write " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os)
            throw Error(ErrorKind::BadParams, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorKind::MissingArtifact, "missing file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& path)
{
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::BadFormat, path.string() + ": " + e.what());
    }
}

std::string matrix_csv(const Eigen::MatrixXd& m)
{
    std::string out;
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c)
                out += ',';
            out += format_csv_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

namespace {

double parse_number(const std::string& cell)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        throw Error(ErrorKind::BadFormat, "not a number: '" + cell + "'");
    }
    while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
        ++used;
    if (used != cell.size())
        throw Error(ErrorKind::BadFormat, "not a number: '" + cell + "'");
    return v;
}

} // namespace

Eigen::MatrixXd parse_matrix_csv(std::string_view text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            row.push_back(parse_number(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorKind::BadFormat, "ragged CSV matrix");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return m;
}

Eigen::VectorXd parse_vector(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '[') {
        Json doc;
        try {
            doc = Json::parse(text);
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::BadFormat, e.what());
        }
        Eigen::VectorXd v(static_cast<Index>(doc.size()));
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (!doc[i].is_number())
                throw Error(ErrorKind::BadFormat, "signal entries must be numbers");
            v(static_cast<Index>(i)) = doc[i].get<double>();
        }
        return v;
    }
    const Eigen::MatrixXd m = parse_matrix_csv(text);
    if (m.cols() == 1)
        return m.col(0);
    if (m.rows() == 1)
        return m.row(0).transpose();
    throw Error(ErrorKind::BadFormat, "expected a single CSV column or row");
}

Json space_to_json(const QuasiMetricSpace& space)
{
    const Index n = space.size();
    Json doc;
    Json dist = Json::array();
    for (Index i = 0; i < n; ++i) {
        Json row = Json::array();
        for (Index j = 0; j < n; ++j)
            row.push_back(space.d(i, j));
        dist.push_back(std::move(row));
    }
    doc["dist"] = std::move(dist);
    Json w = Json::array();
    for (Index i = 0; i < n; ++i)
        w.push_back(space.weights()(i));
    doc["weights"] = std::move(w);
    if (space.coords()) {
        const Eigen::MatrixXd& c = *space.coords();
        Json coords = Json::array();
        for (Index i = 0; i < c.rows(); ++i) {
            Json row = Json::array();
            for (Index j = 0; j < c.cols(); ++j)
                row.push_back(c(i, j));
            coords.push_back(std::move(row));
        }
        doc["coords"] = std::move(coords);
    }
    return doc;
}

namespace {

Eigen::MatrixXd json_matrix(const Json& j, const char* what)
{
    if (!j.is_array())
        throw Error(ErrorKind::BadFormat, std::string(what) + " must be an array of rows");
    const auto rows = j.size();
    const std::size_t cols = rows ? j[0].size() : 0;
    Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw Error(ErrorKind::AxiomViolation, std::string(what) + " is not rectangular");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                throw Error(ErrorKind::BadFormat, std::string(what) + " entries must be numbers");
            m(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

} // namespace

QuasiMetricSpace space_from_json(const Json& doc)
{
    if (!doc.is_object() || !doc.contains("dist") || !doc.contains("weights"))
        throw Error(ErrorKind::BadFormat, "space needs 'dist' and 'weights'");
    Eigen::MatrixXd dist = json_matrix(doc["dist"], "dist");
    const Json& wj = doc["weights"];
    if (!wj.is_array())
        throw Error(ErrorKind::BadFormat, "weights must be an array");
    Eigen::VectorXd w(static_cast<Index>(wj.size()));
    for (std::size_t i = 0; i < wj.size(); ++i) {
        if (!wj[i].is_number())
            throw Error(ErrorKind::BadFormat, "weights must be numbers");
        w(static_cast<Index>(i)) = wj[i].get<double>();
    }
    std::optional<Eigen::MatrixXd> coords;
    if (doc.contains("coords"))
        coords = json_matrix(doc["coords"], "coords");
    return QuasiMetricSpace::build(std::move(dist), std::move(w), std::move(coords));
}

QuasiMetricSpace load_space(const fs::path& path) { return space_from_json(read_json(path)); }

QuasiMetricSpace load_space_csv(const fs::path& dist, const fs::path& weights)
{
    Eigen::MatrixXd d = parse_matrix_csv(read_file(dist));
    Eigen::VectorXd w = parse_vector(read_file(weights));
    return QuasiMetricSpace::build(std::move(d), std::move(w));
}

Json nets_to_json(const NestedNets& nets)
{
    Json doc;
    doc["delta"] = nets.delta();
    doc["k_min"] = nets.k_min();
    doc["k_max"] = nets.k_max();
    Json levels = Json::array();
    for (const auto& lvl : nets.levels())
        levels.push_back(lvl);
    doc["levels"] = std::move(levels);
    return doc;
}

NestedNets nets_from_json(const Json& doc)
{
    try {
        return NestedNets::from_levels(doc.at("delta").get<double>(), doc.at("k_min").get<int>(),
                                       doc.at("levels").get<std::vector<std::vector<Index>>>());
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("nets file: ") + e.what());
    }
}

Json basis_header(const WaveletBasis& basis)
{
    Json doc;
    doc["k_min"] = basis.k_min;
    doc["k_max"] = basis.k_max;
    doc["delta"] = basis.delta;
    doc["count"] = basis.count();
    doc["points"] = basis.constant.size();
    Json levels = Json::array();
    for (const auto& l : basis.levels) {
        Json e;
        e["k"] = l.k;
        e["centers"] = l.centers;
        e["center_mass"] = std::vector<double>(l.center_mass.data(), l.center_mass.data() + l.center_mass.size());
        e["fine_mass"] = std::vector<double>(l.fine_mass.data(), l.fine_mass.data() + l.fine_mass.size());
        levels.push_back(std::move(e));
    }
    doc["levels"] = std::move(levels);
    return doc;
}

WaveletBasis basis_from_files(const Json& header, const Eigen::MatrixXd& values)
{
    WaveletBasis basis;
    try {
        basis.k_min = header.at("k_min").get<int>();
        basis.k_max = header.at("k_max").get<int>();
        basis.delta = header.at("delta").get<double>();
        const auto count = header.at("count").get<Index>();
        const auto points = header.at("points").get<Index>();
        if (values.rows() != count || values.cols() != points)
            throw Error(ErrorKind::DimensionMismatch, "basis matrix shape disagrees with its header");
        basis.constant = values.row(0).transpose();
        Index row = 1;
        for (const auto& e : header.at("levels")) {
            WaveletLevel l;
            l.k = e.at("k").get<int>();
            l.centers = e.at("centers").get<std::vector<Index>>();
            const auto cm = e.at("center_mass").get<std::vector<double>>();
            const auto fm = e.at("fine_mass").get<std::vector<double>>();
            const auto m = static_cast<Index>(l.centers.size());
            if (static_cast<Index>(cm.size()) != m || static_cast<Index>(fm.size()) != m || row + m > count)
                throw Error(ErrorKind::DimensionMismatch, "basis header level sizes are inconsistent");
            l.center_mass = Eigen::Map<const Eigen::VectorXd>(cm.data(), m);
            l.fine_mass = Eigen::Map<const Eigen::VectorXd>(fm.data(), m);
            l.wavelets = values.middleRows(row, m);
            l.rank = m;
            row += m;
            basis.levels.push_back(std::move(l));
        }
        if (row != count)
            throw Error(ErrorKind::DimensionMismatch, "basis header does not cover every row");
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("basis header: ") + e.what());
    }
    return basis;
}

} // namespace qmw
