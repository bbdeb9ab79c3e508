#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valsteer/catalog.hpp"
#include "valsteer/condition.hpp"
#include "valsteer/rational.hpp"
#include "valsteer/ternary.hpp"

namespace valsteer {

/// Local answer rules. After lowercasing and stripping leading whitespace and
/// punctuation: "yes"/"sure" -> yes, "no" -> no, "unsure"/"i cannot"/
/// "i am unable" -> unsure. Anything else returns nullopt and the caller
/// escalates to the judge endpoint.
std::optional<TernaryLabel> classify_answer(std::string_view answer);

/// The frozen rule prefixes, exposed so tests can check mutual exclusivity.
const std::vector<std::pair<std::string, TernaryLabel>>& answer_rule_prefixes();

/// yes -> polarity, no -> -polarity, unsure -> 0.
int score(TernaryLabel label, int polarity);

/// Exact per-value orientation: mean = sum / count, both integers.
struct ScoreCell {
    long long sum = 0;
    long long count = 0;

    Rational mean() const { return make_rational(sum, count); }
    double mean_double() const { return static_cast<double>(sum) / static_cast<double>(count); }
};

/// Exact mean equality via cross-multiplication; (1,4) and (2,8) are equal.
bool same_mean(const ScoreCell& a, const ScoreCell& b);

/// Mean inequality test. epsilon <= 0 compares exactly; a positive epsilon
/// compares double means, for matrices ingested from float sources.
bool cell_differs(const ScoreCell& a, const ScoreCell& b, double epsilon = 0.0);

using OrientationVector = std::map<std::string, ScoreCell>;

/// Aggregates labeled records of one condition into per-value (sum, count)
/// pairs, counting only questions in `question_filter`. Values with no
/// answered question are absent from the result.
OrientationVector orientation(const std::vector<ResponseRecord>& records, const Catalog& catalog,
                              const std::vector<std::string>& question_filter);

/// Fraction of records whose answer label and judged thought label disagree.
Rational thought_answer_inconsistency(const std::vector<ResponseRecord>& records);

} // namespace valsteer
