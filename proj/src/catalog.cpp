#include "valsteer/catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace valsteer {

using nlohmann::json;

Catalog::Catalog(std::vector<ValueDim> values, std::vector<QuestionItem> questions)
    : values_(std::move(values)), questions_(std::move(questions)) {
    reindex();
    validate();
}

void Catalog::reindex() {
    value_index_.clear();
    question_index_.clear();
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!value_index_.emplace(values_[i].id, i).second)
            throw IntegrityError("duplicate value id '" + values_[i].id + "'");
    }
    for (std::size_t i = 0; i < questions_.size(); ++i) {
        if (!question_index_.emplace(questions_[i].id, i).second)
            throw IntegrityError("duplicate question id '" + questions_[i].id + "'");
    }
}

void Catalog::validate() const {
    for (const auto& v : values_) {
        if (v.question_ids.empty())
            throw IntegrityError("value '" + v.id + "' has no questions");
        std::set<std::string> seen;
        for (const auto& qid : v.question_ids) {
            if (!seen.insert(qid).second)
                throw IntegrityError("value '" + v.id + "' lists question '" + qid + "' twice");
            auto it = question_index_.find(qid);
            if (it == question_index_.end())
                throw IntegrityError("value '" + v.id + "' references unknown question '" + qid + "'");
            if (questions_[it->second].value_id != v.id)
                throw IntegrityError("question '" + qid + "' owned by '" +
                                     questions_[it->second].value_id + "', listed under '" + v.id + "'");
        }
    }
    for (const auto& q : questions_) {
        if (q.polarity != +1 && q.polarity != -1)
            throw IntegrityError("question '" + q.id + "' polarity must be +1 or -1");
        if (!value_index_.count(q.value_id))
            throw IntegrityError("question '" + q.id + "' references unknown value '" + q.value_id + "'");
    }
}

const ValueDim& Catalog::value(const std::string& id) const {
    auto it = value_index_.find(id);
    if (it == value_index_.end()) throw UnknownValue("no value '" + id + "' in catalog");
    return values_[it->second];
}

const QuestionItem& Catalog::question(const std::string& id) const {
    auto it = question_index_.find(id);
    if (it == question_index_.end()) throw IntegrityError("no question '" + id + "' in catalog");
    return questions_[it->second];
}

std::vector<std::string> Catalog::value_ids() const {
    std::vector<std::string> ids;
    ids.reserve(values_.size());
    for (const auto& v : values_) ids.push_back(v.id);
    return ids;
}

namespace {

json require_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw ParseError("missing field '" + std::string(key) + "' in " + where);
    return j.at(key);
}

} // namespace

Catalog parse_catalog(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("values") || !j["values"].is_array())
        throw ParseError("catalog must be an object with a 'values' array");

    std::vector<ValueDim> values;
    std::vector<QuestionItem> questions;
    for (const auto& jv : j["values"]) {
        ValueDim v;
        v.id = require_field(jv, "id", "value").get<std::string>();
        v.name = jv.value("name", v.id);
        v.definition = jv.value("definition", std::string());
        if (jv.contains("upper_dimensions")) {
            for (const auto& t : jv.at("upper_dimensions"))
                v.upper_dimensions.push_back(t.get<std::string>());
        }
        for (const auto& jq : require_field(jv, "questions", "value '" + v.id + "'")) {
            QuestionItem q;
            q.id = require_field(jq, "id", "question of '" + v.id + "'").get<std::string>();
            q.value_id = v.id;
            q.text = require_field(jq, "text", "question '" + q.id + "'").get<std::string>();
            const json jp = require_field(jq, "polarity", "question '" + q.id + "'");
            if (!jp.is_number_integer())
                throw ParseError("polarity of question '" + q.id + "' must be an integer");
            q.polarity = jp.get<int>();
            v.question_ids.push_back(q.id);
            questions.push_back(std::move(q));
        }
        values.push_back(std::move(v));
    }
    return Catalog(std::move(values), std::move(questions));
}

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open catalog file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_catalog(ss.str());
}

std::string serialize_catalog(const Catalog& catalog) {
    json values = json::array();
    for (const auto& v : catalog.values()) {
        json jv;
        jv["id"] = v.id;
        jv["name"] = v.name;
        jv["definition"] = v.definition;
        if (!v.upper_dimensions.empty()) jv["upper_dimensions"] = v.upper_dimensions;
        json qs = json::array();
        for (const auto& qid : v.question_ids) {
            const auto& q = catalog.question(qid);
            qs.push_back({{"id", q.id}, {"text", q.text}, {"polarity", q.polarity}});
        }
        jv["questions"] = std::move(qs);
        values.push_back(std::move(jv));
    }
    return json{{"values", std::move(values)}}.dump(2) + "\n";
}

void save_catalog(const Catalog& catalog, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write catalog file '" + path + "'");
    out << serialize_catalog(catalog);
}

Catalog filter_values(const Catalog& catalog, int min_questions) {
    if (min_questions < 1) throw InvalidParameter("min_questions must be >= 1");
    std::vector<ValueDim> values;
    std::vector<QuestionItem> questions;
    for (const auto& v : catalog.values()) {
        if (static_cast<int>(v.question_ids.size()) <= min_questions) continue;
        values.push_back(v);
        for (const auto& qid : v.question_ids) questions.push_back(catalog.question(qid));
    }
    if (values.empty())
        throw EmptyResult("no value has more than " + std::to_string(min_questions) + " questions");
    return Catalog(std::move(values), std::move(questions));
}

bool operator==(const Catalog& a, const Catalog& b) {
    if (a.values().size() != b.values().size()) return false;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const auto& va = a.values()[i];
        const auto& vb = b.values()[i];
        if (va.id != vb.id || va.name != vb.name || va.definition != vb.definition ||
            va.upper_dimensions != vb.upper_dimensions || va.question_ids != vb.question_ids)
            return false;
        for (const auto& qid : va.question_ids) {
            const auto& qa = a.question(qid);
            const auto& qb = b.question(qid);
            if (qa.text != qb.text || qa.polarity != qb.polarity || qa.value_id != qb.value_id)
                return false;
        }
    }
    return true;
}

} // namespace valsteer
