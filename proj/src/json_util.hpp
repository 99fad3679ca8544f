#ifndef NNREACH_SRC_JSON_UTIL_HPP
#define NNREACH_SRC_JSON_UTIL_HPP

#include "nnreach/errors.hpp"
#include "nnreach/interval.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace nnreach::json_util {

using nlohmann::json;

inline const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where + ": missing field \"" + key + "\"");
    return j.at(key);
}

inline VectorXd to_vector(const json& j, const std::string& where)
{
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(where + ": expected an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

/// Row-major nested arrays. An empty outer array gives a 0x`cols` matrix.
inline MatrixXd to_matrix(const json& j, const std::string& where, Eigen::Index cols = 0)
{
    if (!j.is_array()) throw ConfigError(where + ": expected an array of rows");
    if (j.empty()) return MatrixXd(0, cols);
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) throw ConfigError(where + ": expected an array of rows");
    const auto ncols = static_cast<Eigen::Index>(j[0].size());
    MatrixXd m(rows, ncols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols)
            throw ConfigError(where + ": ragged matrix at row " + std::to_string(r));
        for (Eigen::Index c = 0; c < ncols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ConfigError(where + ": non-numeric matrix entry");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

inline json from_vector(const VectorXd& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json from_matrix(const MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(from_vector(m.row(r).transpose()));
    return rows;
}

inline json from_box(const BoxXd& b)
{
    return json{{"lower", from_vector(b.lower())}, {"upper", from_vector(b.upper())}};
}

inline BoxXd to_box(const json& j, const std::string& where)
{
    VectorXd lo = to_vector(field(j, "lower", where), where + ".lower");
    VectorXd hi = to_vector(field(j, "upper", where), where + ".upper");
    try {
        return BoxXd(std::move(lo), std::move(hi));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path);

} // namespace nnreach::json_util

#endif
