#pragma once

#include <map>
#include <string>
#include <vector>

#include "valsteer/errors.hpp"

namespace valsteer {

struct QuestionItem {
    std::string id;
    std::string value_id;
    std::string text;
    int polarity = +1; // +1 when "yes" indicates a higher orientation, -1 when reverse-keyed
};

struct ValueDim {
    std::string id;
    std::string name;
    std::string definition;
    std::vector<std::string> upper_dimensions; // optional hierarchy tags
    std::vector<std::string> question_ids;     // ordered, non-empty
};

/// Validated questionnaire: value dimensions plus their questions.
class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<ValueDim> values, std::vector<QuestionItem> questions);

    const std::vector<ValueDim>& values() const { return values_; }
    const ValueDim& value(const std::string& id) const;
    bool has_value(const std::string& id) const { return value_index_.count(id) > 0; }

    const QuestionItem& question(const std::string& id) const;
    bool has_question(const std::string& id) const { return question_index_.count(id) > 0; }
    std::size_t question_count() const { return questions_.size(); }

    /// Value ids in catalog order.
    std::vector<std::string> value_ids() const;

private:
    void validate() const;
    void reindex();

    std::vector<ValueDim> values_;
    std::vector<QuestionItem> questions_;
    std::map<std::string, std::size_t> value_index_;
    std::map<std::string, std::size_t> question_index_;
};

Catalog load_catalog(const std::string& path);
Catalog parse_catalog(const std::string& json_text);
std::string serialize_catalog(const Catalog& catalog);
void save_catalog(const Catalog& catalog, const std::string& path);

/// Keeps values with strictly more than `min_questions` questions.
/// Throws EmptyResult when nothing survives.
Catalog filter_values(const Catalog& catalog, int min_questions = 20);

bool operator==(const Catalog& a, const Catalog& b);

} // namespace valsteer
