#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "prefrank/types.hpp"

namespace prefrank::detail {

inline nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("expected a numeric array");
    auto s = j.get<std::vector<double>>();
    return Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

// Row-major nested arrays.
inline nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
    return rows;
}

inline Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto v = vec_from_json(j[static_cast<std::size_t>(r)]);
        if (v.size() != cols) throw ValidationError("ragged matrix rows");
        m.row(r) = v.transpose();
    }
    return m;
}

}  // namespace prefrank::detail
