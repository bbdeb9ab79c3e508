#include "valsteer/condition.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace valsteer {

using nlohmann::json;

std::string Role::bio() const {
    if (attributes.size() == 1 && attributes.front().first == "bio")
        return attributes.front().second;
    std::string out;
    for (const auto& [k, v] : attributes) {
        if (!out.empty()) out += "; ";
        out += k + ": " + v;
    }
    return out;
}

RoleSet::RoleSet(std::vector<Role> roles) : roles_(std::move(roles)) {
    for (std::size_t i = 0; i < roles_.size(); ++i) {
        if (!index_.emplace(roles_[i].id, i).second)
            throw IntegrityError("duplicate role id '" + roles_[i].id + "'");
        if (roles_[i].is_baseline) {
            if (!baseline_id_.empty())
                throw IntegrityError("more than one baseline role ('" + baseline_id_ + "', '" +
                                     roles_[i].id + "')");
            if (!roles_[i].attributes.empty())
                throw IntegrityError("baseline role '" + roles_[i].id + "' must have empty attributes");
            baseline_id_ = roles_[i].id;
        }
    }
    if (!roles_.empty() && baseline_id_.empty())
        throw IntegrityError("role set has no baseline role");
}

const Role& RoleSet::role(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw IntegrityError("no role '" + id + "'");
    return roles_[it->second];
}

RoleSet parse_roles(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("roles file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("roles") || !j["roles"].is_array())
        throw ParseError("roles file must be an object with a 'roles' array");
    std::vector<Role> roles;
    for (const auto& jr : j["roles"]) {
        Role r;
        if (!jr.contains("id")) throw ParseError("role without id");
        r.id = jr.at("id").get<std::string>();
        r.is_baseline = jr.value("is_baseline", false);
        if (jr.contains("attributes")) {
            const json& ja = jr.at("attributes");
            if (ja.is_array()) {
                for (const auto& pair : ja) {
                    if (!pair.is_array() || pair.size() != 2)
                        throw ParseError("role '" + r.id + "' attribute entries must be [key, value]");
                    r.attributes.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
                }
            } else if (ja.is_object()) {
                for (auto it = ja.begin(); it != ja.end(); ++it)
                    r.attributes.emplace_back(it.key(), it.value().get<std::string>());
            } else {
                throw ParseError("role '" + r.id + "' attributes must be an array or object");
            }
        }
        roles.push_back(std::move(r));
    }
    return RoleSet(std::move(roles));
}

RoleSet load_roles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open roles file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_roles(ss.str());
}

std::string serialize_roles(const RoleSet& roles) {
    json arr = json::array();
    for (const auto& r : roles.roles()) {
        json attrs = json::array();
        for (const auto& [k, v] : r.attributes) attrs.push_back({k, v});
        arr.push_back({{"id", r.id}, {"attributes", std::move(attrs)}, {"is_baseline", r.is_baseline}});
    }
    return json{{"roles", std::move(arr)}}.dump(2) + "\n";
}

std::string to_string(SteerDirection d) {
    return d == SteerDirection::inclined ? "inclined" : "disinclined";
}

namespace {

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

SteeringCondition SteeringCondition::make_role(std::string role_id, std::string template_id) {
    SteeringCondition c;
    c.kind = Kind::role;
    c.role_id = std::move(role_id);
    c.template_id = std::move(template_id);
    return c;
}

SteeringCondition SteeringCondition::make_sae(std::string role_id, long long feature_id, int layer,
                                              double strength, std::string token_span,
                                              std::string template_id) {
    SteeringCondition c;
    c.kind = Kind::sae;
    c.role_id = std::move(role_id);
    c.feature_id = feature_id;
    c.layer = layer;
    c.strength = strength;
    c.token_span = std::move(token_span);
    c.template_id = std::move(template_id);
    return c;
}

SteeringCondition SteeringCondition::make_instruction(std::string role_id, std::string value_id,
                                                      SteerDirection dir, std::string template_id) {
    SteeringCondition c;
    c.kind = Kind::instruction;
    c.role_id = std::move(role_id);
    c.value_id = std::move(value_id);
    c.direction = dir;
    c.template_id = std::move(template_id);
    return c;
}

std::string SteeringCondition::key() const {
    switch (kind) {
        case Kind::role:
            return "role:" + role_id;
        case Kind::sae:
            return "sae:" + role_id + ":L" + std::to_string(layer) + ":f" +
                   std::to_string(feature_id) + "x" + format_double(strength);
        case Kind::instruction:
            return "instr:" + role_id + ":" + value_id + ":" +
                   to_string(direction.value_or(SteerDirection::inclined));
    }
    return "role:" + role_id;
}

void SteeringCondition::validate(const RoleSet* roles, const Catalog* catalog) const {
    if (roles && !roles->has_role(role_id))
        throw IntegrityError("condition references unknown role '" + role_id + "'");
    if (kind == Kind::sae && !(strength > 0.0))
        throw IntegrityError("SAE condition strength must be > 0");
    if (kind == Kind::instruction) {
        if (!direction) throw IntegrityError("instruction condition lacks a direction");
        if (catalog && !catalog->has_value(value_id))
            throw IntegrityError("instruction condition references unknown value '" + value_id + "'");
    }
}

bool operator==(const SteeringCondition& a, const SteeringCondition& b) {
    return a.key() == b.key() && a.template_id == b.template_id;
}

json condition_to_json(const SteeringCondition& c) {
    json j;
    switch (c.kind) {
        case SteeringCondition::Kind::role:
            j["type"] = "role";
            break;
        case SteeringCondition::Kind::sae:
            j["type"] = "sae";
            j["feature_id"] = c.feature_id;
            j["layer"] = c.layer;
            j["strength"] = c.strength;
            j["token_span"] = c.token_span;
            break;
        case SteeringCondition::Kind::instruction:
            j["type"] = "instruction";
            j["value_id"] = c.value_id;
            j["direction"] = to_string(*c.direction);
            break;
    }
    j["role_id"] = c.role_id;
    j["template_id"] = c.template_id;
    return j;
}

SteeringCondition condition_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j.contains("role_id"))
        throw ParseError("condition needs 'type' and 'role_id' (" + where + ")");
    const std::string type = j.at("type").get<std::string>();
    const std::string role_id = j.at("role_id").get<std::string>();
    const std::string template_id = j.value("template_id", "questionnaire-v1");
    if (type == "role") {
        return SteeringCondition::make_role(role_id, template_id);
    }
    if (type == "sae") {
        for (const char* k : {"feature_id", "layer", "strength"})
            if (!j.contains(k)) throw ParseError("sae condition missing '" + std::string(k) + "' (" + where + ")");
        auto c = SteeringCondition::make_sae(role_id, j.at("feature_id").get<long long>(),
                                             j.at("layer").get<int>(), j.at("strength").get<double>(),
                                             j.value("token_span", "your values"), template_id);
        if (!(c.strength > 0.0)) throw ParseError("sae strength must be > 0 (" + where + ")");
        return c;
    }
    if (type == "instruction") {
        if (!j.contains("value_id") || !j.contains("direction"))
            throw ParseError("instruction condition missing 'value_id' or 'direction' (" + where + ")");
        const std::string dir = j.at("direction").get<std::string>();
        if (dir != "inclined" && dir != "disinclined")
            throw ParseError("direction must be 'inclined' or 'disinclined' (" + where + ")");
        return SteeringCondition::make_instruction(
            role_id, j.at("value_id").get<std::string>(),
            dir == "inclined" ? SteerDirection::inclined : SteerDirection::disinclined, template_id);
    }
    throw ParseError("unknown condition type '" + type + "' (" + where + ")");
}

std::vector<ResponseRecord> parse_responses(const std::string& jsonl_text) {
    std::vector<ResponseRecord> records;
    std::istringstream in(jsonl_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("bad JSON at " + where + ": " + e.what());
        }
        for (const char* k : {"condition", "question_id", "thought", "answer"})
            if (!j.contains(k))
                throw ParseError("missing field '" + std::string(k) + "' at " + where);
        ResponseRecord r;
        r.condition = condition_from_json(j.at("condition"), where);
        r.question_id = j.at("question_id").get<std::string>();
        r.thought = j.at("thought").get<std::string>();
        r.answer = j.at("answer").get<std::string>();
        for (const auto& [field, slot] :
             {std::pair<const char*, std::optional<TernaryLabel>*>{"label", &r.label},
              {"thought_label", &r.thought_label}}) {
            if (!j.contains(field) || j.at(field).is_null()) continue;
            auto parsed = ternary_from_string(j.at(field).get<std::string>());
            if (!parsed)
                throw ParseError(std::string(field) + " must be yes/no/unsure at " + where);
            *slot = parsed;
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<ResponseRecord> load_responses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open responses file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_responses(ss.str());
}

std::string serialize_responses(const std::vector<ResponseRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        json j;
        j["condition"] = condition_to_json(r.condition);
        j["question_id"] = r.question_id;
        j["thought"] = r.thought;
        j["answer"] = r.answer;
        if (r.label) j["label"] = to_string(*r.label);
        if (r.thought_label) j["thought_label"] = to_string(*r.thought_label);
        out += j.dump();
        out += "\n";
    }
    return out;
}

void save_responses(const std::vector<ResponseRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write responses file '" + path + "'");
    out << serialize_responses(records);
}

void check_responses(const std::vector<ResponseRecord>& records, const Catalog& catalog) {
    std::set<std::string> missing;
    for (const auto& r : records)
        if (!catalog.has_question(r.question_id)) missing.insert(r.question_id);
    if (!missing.empty()) {
        std::string ids;
        for (const auto& id : missing) {
            if (!ids.empty()) ids += ", ";
            ids += "'" + id + "'";
        }
        throw IntegrityError("responses reference unknown questions: " + ids);
    }
}

} // namespace valsteer
