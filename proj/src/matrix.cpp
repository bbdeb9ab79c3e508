#include "valsteer/matrix.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace valsteer {

using nlohmann::json;

OrientationMatrix::OrientationMatrix(std::vector<std::string> columns, std::vector<Row> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
    if (rows_.empty()) throw EmptyMatrix("orientation matrix needs at least one row");
    std::sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (!col_index_.emplace(columns_[i], i).second)
            throw IntegrityError("duplicate matrix column '" + columns_[i] + "'");
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].cells.size() != columns_.size())
            throw IntegrityError("row '" + rows_[i].key + "' does not share the column set");
        if (!row_index_.emplace(rows_[i].key, i).second)
            throw IntegrityError("duplicate matrix row '" + rows_[i].key + "'");
    }
}

const OrientationMatrix::Row& OrientationMatrix::row(const std::string& key) const {
    auto it = row_index_.find(key);
    if (it == row_index_.end()) throw MissingBaseline("no matrix row '" + key + "'");
    return rows_[it->second];
}

std::size_t OrientationMatrix::column_index(const std::string& value_id) const {
    auto it = col_index_.find(value_id);
    if (it == col_index_.end()) throw UnknownValue("no matrix column '" + value_id + "'");
    return it->second;
}

const std::optional<ScoreCell>& OrientationMatrix::cell(const std::string& row_key,
                                                        const std::string& value_id) const {
    return row(row_key).cells[column_index(value_id)];
}

OrientationMatrix build_matrix(const std::vector<ResponseRecord>& records, const Catalog& catalog,
                               const DatasetSplit& split, bool use_all_questions) {
    if (records.empty()) throw EmptyMatrix("no records to score");

    std::map<std::string, std::vector<const ResponseRecord*>> by_condition;
    for (const auto& r : records) by_condition[r.condition.key()].push_back(&r);

    const std::vector<std::string> columns = catalog.value_ids();
    std::vector<OrientationMatrix::Row> rows;
    rows.reserve(by_condition.size());
    for (const auto& [key, recs] : by_condition) {
        OrientationMatrix::Row row;
        row.key = key;
        row.condition = recs.front()->condition;
        row.cells.resize(columns.size());

        // per-value allowed question set for this condition
        std::map<std::string, std::vector<std::string>> filters;
        for (const auto& v : catalog.values()) {
            filters[v.id] = use_all_questions ? v.question_ids
                                              : split.question_filter(row.condition, v.id);
        }
        for (const ResponseRecord* r : recs) {
            const auto& q = catalog.question(r->question_id);
            const auto& allowed = filters[q.value_id];
            if (!std::count(allowed.begin(), allowed.end(), r->question_id)) continue;
            if (!r->label)
                throw UnlabeledRecord("record for question '" + r->question_id + "' under '" + key +
                                      "' has no label");
            auto& cell = row.cells[static_cast<std::size_t>(
                std::find(columns.begin(), columns.end(), q.value_id) - columns.begin())];
            if (!cell) cell = ScoreCell{};
            cell->sum += score(*r->label, q.polarity);
            cell->count += 1;
        }
        rows.push_back(std::move(row));
    }
    return OrientationMatrix(columns, std::move(rows));
}

OrientationMatrix matrix_from_vectors(
    const Catalog& catalog,
    const std::vector<std::pair<SteeringCondition, OrientationVector>>& vectors) {
    const std::vector<std::string> columns = catalog.value_ids();
    std::vector<OrientationMatrix::Row> rows;
    rows.reserve(vectors.size());
    for (const auto& [condition, vec] : vectors) {
        OrientationMatrix::Row row;
        row.key = condition.key();
        row.condition = condition;
        row.cells.resize(columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            auto it = vec.find(columns[c]);
            if (it != vec.end()) row.cells[c] = it->second;
        }
        rows.push_back(std::move(row));
    }
    return OrientationMatrix(columns, std::move(rows));
}

std::string matrix_to_csv(const OrientationMatrix& matrix) {
    std::string out = "condition";
    for (const auto& c : matrix.columns()) out += "," + c;
    out += "\n";
    for (const auto& row : matrix.rows()) {
        out += row.key;
        for (const auto& cell : row.cells) {
            out += ",";
            if (cell) out += std::to_string(cell->sum) + "/" + std::to_string(cell->count);
        }
        out += "\n";
    }
    return out;
}

std::string serialize_matrix(const OrientationMatrix& matrix) {
    json rows = json::array();
    for (const auto& row : matrix.rows()) {
        json cells = json::object();
        for (std::size_t c = 0; c < matrix.columns().size(); ++c) {
            if (row.cells[c])
                cells[matrix.columns()[c]] = json::array({row.cells[c]->sum, row.cells[c]->count});
        }
        rows.push_back({{"key", row.key},
                        {"condition", condition_to_json(row.condition)},
                        {"cells", std::move(cells)}});
    }
    return json{{"columns", matrix.columns()}, {"rows", std::move(rows)}}.dump(2) + "\n";
}

OrientationMatrix parse_matrix(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("matrix file is not valid JSON: ") + e.what());
    }
    try {
        std::vector<std::string> columns = j.at("columns").get<std::vector<std::string>>();
        std::vector<OrientationMatrix::Row> rows;
        for (const auto& jr : j.at("rows")) {
            OrientationMatrix::Row row;
            row.key = jr.at("key").get<std::string>();
            row.condition = condition_from_json(jr.at("condition"), "matrix row " + row.key);
            row.cells.resize(columns.size());
            const json& cells = jr.at("cells");
            for (std::size_t c = 0; c < columns.size(); ++c) {
                auto it = cells.find(columns[c]);
                if (it == cells.end()) continue;
                if (!it->is_array() || it->size() != 2)
                    throw ParseError("cell '" + columns[c] + "' of row '" + row.key +
                                     "' must be [sum, count]");
                ScoreCell cell;
                cell.sum = (*it)[0].get<long long>();
                cell.count = (*it)[1].get<long long>();
                if (cell.count <= 0) throw ParseError("cell count must be positive in row '" + row.key + "'");
                row.cells[c] = cell;
            }
            rows.push_back(std::move(row));
        }
        return OrientationMatrix(std::move(columns), std::move(rows));
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed matrix file: ") + e.what());
    }
}

OrientationMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open matrix file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix(ss.str());
}

void save_matrix(const OrientationMatrix& matrix, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write matrix file '" + path + "'");
    out << serialize_matrix(matrix);
}

bool operator==(const OrientationMatrix& a, const OrientationMatrix& b) {
    if (a.columns() != b.columns() || a.rows().size() != b.rows().size()) return false;
    for (std::size_t i = 0; i < a.rows().size(); ++i) {
        const auto& ra = a.rows()[i];
        const auto& rb = b.rows()[i];
        if (ra.key != rb.key) return false;
        for (std::size_t c = 0; c < ra.cells.size(); ++c) {
            if (ra.cells[c].has_value() != rb.cells[c].has_value()) return false;
            if (ra.cells[c] && (ra.cells[c]->sum != rb.cells[c]->sum ||
                                ra.cells[c]->count != rb.cells[c]->count))
                return false;
        }
    }
    return true;
}

} // namespace valsteer
