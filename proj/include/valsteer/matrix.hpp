#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valsteer/scoring.hpp"
#include "valsteer/split.hpp"

namespace valsteer {

/// Orientation matrix: one row per steering condition, one column per value
/// dimension, cells are optional exact (sum, count) pairs.
class OrientationMatrix {
public:
    struct Row {
        std::string key;
        SteeringCondition condition;
        std::vector<std::optional<ScoreCell>> cells; // aligned with columns()
    };

    OrientationMatrix() = default;
    OrientationMatrix(std::vector<std::string> columns, std::vector<Row> rows);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<Row>& rows() const { return rows_; }

    bool has_row(const std::string& key) const { return row_index_.count(key) > 0; }
    const Row& row(const std::string& key) const;
    std::size_t column_index(const std::string& value_id) const;
    bool has_column(const std::string& value_id) const { return col_index_.count(value_id) > 0; }

    const std::optional<ScoreCell>& cell(const std::string& row_key, const std::string& value_id) const;

private:
    std::vector<std::string> columns_;
    std::vector<Row> rows_; // sorted by key
    std::map<std::string, std::size_t> row_index_;
    std::map<std::string, std::size_t> col_index_;
};

/// Scores labeled records into a matrix. Question filters come from the
/// split (30% test slice for test roles, 40% dyad samples otherwise);
/// `use_all_questions` scores every catalog question instead.
OrientationMatrix build_matrix(const std::vector<ResponseRecord>& records, const Catalog& catalog,
                               const DatasetSplit& split, bool use_all_questions = false);

/// Matrix from precomputed rows (used by the synthetic generator).
OrientationMatrix matrix_from_vectors(
    const Catalog& catalog,
    const std::vector<std::pair<SteeringCondition, OrientationVector>>& rows);

std::string matrix_to_csv(const OrientationMatrix& matrix);
std::string serialize_matrix(const OrientationMatrix& matrix);
OrientationMatrix parse_matrix(const std::string& json_text);
OrientationMatrix load_matrix(const std::string& path);
void save_matrix(const OrientationMatrix& matrix, const std::string& path);

bool operator==(const OrientationMatrix& a, const OrientationMatrix& b);

} // namespace valsteer
