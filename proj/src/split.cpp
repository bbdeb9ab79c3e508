#include "valsteer/split.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "valsteer/detail/rng.hpp"

namespace valsteer {

using nlohmann::json;

std::size_t round_percent(std::size_t pct, std::size_t n) {
    return (pct * n + 50) / 100;
}

namespace {

std::vector<std::string> sample_dyad(std::uint64_t seed, const std::string& condition_key,
                                     const std::string& value_id,
                                     const std::vector<std::string>& train_questions) {
    const std::size_t k = round_percent(40, train_questions.size());
    std::mt19937_64 rng(detail::mix_seed(seed, "dyad", condition_key + "|" + value_id));
    auto sample = detail::sample_without_replacement(train_questions, k, rng);
    std::sort(sample.begin(), sample.end());
    return sample;
}

} // namespace

bool DatasetSplit::is_test_role(const std::string& role_id) const {
    return std::binary_search(test_roles.begin(), test_roles.end(), role_id);
}

std::vector<std::string> DatasetSplit::dyad_sample(const std::string& condition_key,
                                                   const std::string& value_id) const {
    auto row = dyad_samples.find(condition_key);
    if (row != dyad_samples.end()) {
        auto cell = row->second.find(value_id);
        if (cell != row->second.end()) return cell->second;
    }
    auto tq = train_questions.find(value_id);
    if (tq == train_questions.end()) throw UnknownValue("no question split for value '" + value_id + "'");
    return sample_dyad(seed, condition_key, value_id, tq->second);
}

std::vector<std::string> DatasetSplit::question_filter(const SteeringCondition& condition,
                                                       const std::string& value_id) const {
    if (is_test_role(condition.role_id)) {
        auto it = test_questions.find(value_id);
        if (it == test_questions.end()) throw UnknownValue("no question split for value '" + value_id + "'");
        return it->second;
    }
    return dyad_sample(condition.key(), value_id);
}

DatasetSplit split_dataset(const Catalog& catalog, const RoleSet& roles, std::uint64_t seed) {
    if (roles.size() < 2) throw InvalidParameter("need at least 2 roles to split");
    if (roles.baseline_id().empty()) throw IntegrityError("role set has no baseline role");

    for (const auto& v : catalog.values()) {
        if (v.question_ids.size() < 4)
            throw TooFewQuestions("value '" + v.id + "' has " +
                                  std::to_string(v.question_ids.size()) +
                                  " questions; at least 4 are needed for a 30%/40% split");
    }

    DatasetSplit split;
    split.seed = seed;
    split.baseline_role = roles.baseline_id();

    // The baseline role always trains; it is the reference row r0.
    std::vector<std::string> others;
    for (const auto& r : roles.roles())
        if (r.id != roles.baseline_id()) others.push_back(r.id);
    std::sort(others.begin(), others.end());

    const std::size_t n_test = std::min(round_percent(20, roles.size()), others.size());
    std::mt19937_64 role_rng(detail::mix_seed(seed, "roles"));
    detail::shuffle(others, role_rng);
    split.test_roles.assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_roles.assign(others.begin() + static_cast<std::ptrdiff_t>(n_test), others.end());
    split.train_roles.push_back(roles.baseline_id());
    std::sort(split.train_roles.begin(), split.train_roles.end());
    std::sort(split.test_roles.begin(), split.test_roles.end());

    for (const auto& v : catalog.values()) {
        std::vector<std::string> qids = v.question_ids;
        std::sort(qids.begin(), qids.end());
        std::mt19937_64 q_rng(detail::mix_seed(seed, "qsplit", v.id));
        detail::shuffle(qids, q_rng);
        const std::size_t q_test = round_percent(30, qids.size());
        std::vector<std::string> test(qids.begin(), qids.begin() + static_cast<std::ptrdiff_t>(q_test));
        std::vector<std::string> train(qids.begin() + static_cast<std::ptrdiff_t>(q_test), qids.end());
        std::sort(test.begin(), test.end());
        std::sort(train.begin(), train.end());
        split.test_questions[v.id] = std::move(test);
        split.train_questions[v.id] = std::move(train);
    }

    for (const auto& r : roles.roles()) {
        const std::string key = SteeringCondition::make_role(r.id).key();
        for (const auto& v : catalog.values())
            split.dyad_samples[key][v.id] = sample_dyad(seed, key, v.id, split.train_questions[v.id]);
    }
    return split;
}

namespace {

json string_map_to_json(const std::map<std::string, std::vector<std::string>>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

std::map<std::string, std::vector<std::string>> string_map_from_json(const json& j) {
    std::map<std::string, std::vector<std::string>> m;
    for (auto it = j.begin(); it != j.end(); ++it)
        m[it.key()] = it.value().get<std::vector<std::string>>();
    return m;
}

} // namespace

std::string serialize_split(const DatasetSplit& split) {
    json j;
    j["seed"] = split.seed;
    j["baseline_role"] = split.baseline_role;
    j["train_roles"] = split.train_roles;
    j["test_roles"] = split.test_roles;
    j["train_questions"] = string_map_to_json(split.train_questions);
    j["test_questions"] = string_map_to_json(split.test_questions);
    json dyads = json::object();
    for (const auto& [cond, per_value] : split.dyad_samples)
        dyads[cond] = string_map_to_json(per_value);
    j["dyad_samples"] = std::move(dyads);
    return j.dump(2) + "\n";
}

DatasetSplit parse_split(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("split file is not valid JSON: ") + e.what());
    }
    DatasetSplit s;
    try {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.baseline_role = j.at("baseline_role").get<std::string>();
        s.train_roles = j.at("train_roles").get<std::vector<std::string>>();
        s.test_roles = j.at("test_roles").get<std::vector<std::string>>();
        s.train_questions = string_map_from_json(j.at("train_questions"));
        s.test_questions = string_map_from_json(j.at("test_questions"));
        for (auto it = j.at("dyad_samples").begin(); it != j.at("dyad_samples").end(); ++it)
            s.dyad_samples[it.key()] = string_map_from_json(it.value());
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed split file: ") + e.what());
    }
    return s;
}

DatasetSplit load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open split file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_split(ss.str());
}

void save_split(const DatasetSplit& split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write split file '" + path + "'");
    out << serialize_split(split);
}

bool operator==(const DatasetSplit& a, const DatasetSplit& b) {
    return a.seed == b.seed && a.baseline_role == b.baseline_role &&
           a.train_roles == b.train_roles && a.test_roles == b.test_roles &&
           a.train_questions == b.train_questions && a.test_questions == b.test_questions &&
           a.dyad_samples == b.dyad_samples;
}

} // namespace valsteer
