#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "valsteer/catalog.hpp"
#include "valsteer/condition.hpp"
#include "valsteer/matrix.hpp"

namespace valsteer::test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_path(const std::string& name) {
    return std::string(VALSTEER_FIXTURE_DIR) + "/" + name;
}

/// Catalog with the given (value id, question count) pairs; question ids are
/// "<value>:q<i>", all polarity +1 unless the id ends in 'r'.
inline Catalog make_catalog(const std::vector<std::pair<std::string, int>>& shape) {
    std::vector<ValueDim> values;
    std::vector<QuestionItem> questions;
    for (const auto& [vid, count] : shape) {
        ValueDim v;
        v.id = vid;
        v.name = vid;
        v.definition = "definition of " + vid;
        for (int q = 1; q <= count; ++q) {
            QuestionItem item;
            item.id = vid + ":q" + std::to_string(q);
            item.value_id = vid;
            item.text = "Question " + std::to_string(q) + " about " + vid + "?";
            item.polarity = +1;
            v.question_ids.push_back(item.id);
            questions.push_back(std::move(item));
        }
        values.push_back(std::move(v));
    }
    return Catalog(std::move(values), std::move(questions));
}

inline RoleSet make_roles(int n_extra) {
    std::vector<Role> roles;
    Role baseline;
    baseline.id = "r000";
    baseline.is_baseline = true;
    roles.push_back(baseline);
    for (int i = 1; i <= n_extra; ++i) {
        Role r;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "r%03d", i);
        r.id = buf;
        r.attributes = {{"Job", "job " + std::to_string(i)}};
        roles.push_back(r);
    }
    return RoleSet(std::move(roles));
}

/// Matrix from (condition, {value -> (sum, count)}) rows over the catalog.
inline OrientationMatrix make_matrix(
    const Catalog& catalog,
    const std::vector<std::pair<SteeringCondition, std::vector<std::pair<std::string, ScoreCell>>>>&
        rows) {
    std::vector<std::pair<SteeringCondition, OrientationVector>> vectors;
    for (const auto& [cond, cells] : rows) {
        OrientationVector vec;
        for (const auto& [vid, cell] : cells) vec[vid] = cell;
        vectors.emplace_back(cond, std::move(vec));
    }
    return matrix_from_vectors(catalog, vectors);
}

} // namespace valsteer::test
