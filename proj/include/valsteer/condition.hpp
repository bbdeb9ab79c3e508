#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "valsteer/catalog.hpp"
#include "valsteer/ternary.hpp"

namespace valsteer {

struct Role {
    std::string id;
    // ordered attribute list (gender, job, mbti, free-form bio, ...)
    std::vector<std::pair<std::string, std::string>> attributes;
    bool is_baseline = false;

    /// One-line trait description used by the prompt templates. A single
    /// "bio" attribute is taken verbatim, otherwise "Key: value" pairs are
    /// joined with "; ".
    std::string bio() const;
};

/// Role collection with exactly one baseline (empty-attribute) role.
class RoleSet {
public:
    RoleSet() = default;
    explicit RoleSet(std::vector<Role> roles);

    const std::vector<Role>& roles() const { return roles_; }
    const Role& role(const std::string& id) const;
    bool has_role(const std::string& id) const { return index_.count(id) > 0; }
    const std::string& baseline_id() const { return baseline_id_; }
    std::size_t size() const { return roles_.size(); }

private:
    std::vector<Role> roles_;
    std::map<std::string, std::size_t> index_;
    std::string baseline_id_;
};

RoleSet load_roles(const std::string& path);
RoleSet parse_roles(const std::string& json_text);
std::string serialize_roles(const RoleSet& roles);

enum class SteerDirection { inclined, disinclined };

std::string to_string(SteerDirection d);

/// How a response set was produced: a bare role prompt, an SAE feature applied
/// on top of a role, or an explicit value instruction composed with a role.
struct SteeringCondition {
    enum class Kind { role, sae, instruction };

    Kind kind = Kind::role;
    std::string role_id;

    // sae
    long long feature_id = 0;
    int layer = 0;
    double strength = 0.0;
    std::string token_span;

    // instruction
    std::string value_id;
    std::optional<SteerDirection> direction;

    std::string template_id;

    static SteeringCondition make_role(std::string role_id, std::string template_id = "questionnaire-v1");
    static SteeringCondition make_sae(std::string role_id, long long feature_id, int layer,
                                      double strength, std::string token_span = "your values",
                                      std::string template_id = "questionnaire-v1");
    static SteeringCondition make_instruction(std::string role_id, std::string value_id,
                                              SteerDirection dir,
                                              std::string template_id = "instruction-v1");

    /// Canonical identity; used as matrix row key and for ordering.
    std::string key() const;

    void validate(const RoleSet* roles, const Catalog* catalog) const;
};

bool operator==(const SteeringCondition& a, const SteeringCondition& b);

nlohmann::json condition_to_json(const SteeringCondition& condition);
SteeringCondition condition_from_json(const nlohmann::json& j, const std::string& where = "condition");

/// One LLM answer to one question under one condition.
struct ResponseRecord {
    SteeringCondition condition;
    std::string question_id;
    std::string thought;
    std::string answer;
    std::optional<TernaryLabel> label;         // judged answer label
    std::optional<TernaryLabel> thought_label; // judged thought label, when assessed
};

std::vector<ResponseRecord> load_responses(const std::string& path);
std::vector<ResponseRecord> parse_responses(const std::string& jsonl_text);
std::string serialize_responses(const std::vector<ResponseRecord>& records);
void save_responses(const std::vector<ResponseRecord>& records, const std::string& path);

/// Every record must reference a catalog question; offending ids are listed
/// in the thrown IntegrityError rather than dropped.
void check_responses(const std::vector<ResponseRecord>& records, const Catalog& catalog);

} // namespace valsteer
