#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "valsteer/catalog.hpp"
#include "valsteer/condition.hpp"

namespace valsteer {

/// Train/test role partition, per-value 70/30 question partition, and the 40%
/// per-dyad question samples. Everything is a pure function of (inputs, seed).
struct DatasetSplit {
    std::uint64_t seed = 0;
    std::vector<std::string> train_roles; // sorted
    std::vector<std::string> test_roles;  // sorted
    std::string baseline_role;

    std::map<std::string, std::vector<std::string>> train_questions; // value id -> sorted question ids
    std::map<std::string, std::vector<std::string>> test_questions;

    // (condition key, value id) -> sampled train-question subset, materialized
    // for the role conditions known at split time
    std::map<std::string, std::map<std::string, std::vector<std::string>>> dyad_samples;

    bool is_test_role(const std::string& role_id) const;

    /// The 40% sample for an arbitrary condition. Uses the materialized entry
    /// when present and otherwise derives it from the seed, so composite
    /// (role x feature) dyads get stable samples without being stored.
    std::vector<std::string> dyad_sample(const std::string& condition_key,
                                         const std::string& value_id) const;

    /// Questions scored for one (condition, value) dyad: the full 30% test
    /// slice for test roles, the 40% dyad sample of the 70% train slice
    /// otherwise.
    std::vector<std::string> question_filter(const SteeringCondition& condition,
                                             const std::string& value_id) const;
};

/// Integer round-half-up of pct% of n.
std::size_t round_percent(std::size_t pct, std::size_t n);

DatasetSplit split_dataset(const Catalog& catalog, const RoleSet& roles, std::uint64_t seed);

std::string serialize_split(const DatasetSplit& split);
DatasetSplit parse_split(const std::string& json_text);
DatasetSplit load_split(const std::string& path);
void save_split(const DatasetSplit& split, const std::string& path);

bool operator==(const DatasetSplit& a, const DatasetSplit& b);

} // namespace valsteer
