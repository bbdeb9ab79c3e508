#pragma once

#include <array>
#include <string>

#include "valsteer/catalog.hpp"
#include "valsteer/condition.hpp"
#include "valsteer/ternary.hpp"

namespace valsteer {

/// One in-context QA example.
struct Shot {
    std::string question;
    std::string thought;
    std::string answer;
};

/// Questionnaire prompt: role-settings slot, fixed two-shot block, question
/// slot. Rendering is byte-deterministic.
struct PromptTemplate {
    std::string id = "questionnaire-v1";
    std::string preamble; // instruction text; carries the "your values" token span
    std::array<Shot, 2> shots;
    std::string question_prefix = "Question: ";
};

PromptTemplate default_template();

struct RenderedPrompt {
    std::string system_block;
    std::string user_block;

    std::string full_text() const { return system_block + "\n" + user_block; }
};

/// Role-settings block for a condition: trait sentence for plain roles, the
/// explicit value-instruction block for instruction conditions. SAE
/// conditions render exactly like their underlying role.
std::string render_role_block(const SteeringCondition& condition, const RoleSet& roles,
                              const Catalog& catalog);

/// The explicit value-instruction block (direction is "inclined" or
/// "disinclined"). An empty bio drops the trait sentence.
std::string render_instruction_block(const std::string& bio, SteerDirection direction,
                                     const std::string& value_name,
                                     const std::string& value_definition);

/// Canonical slot-marked form of the instruction block.
std::string instruction_template_text();

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const SteeringCondition& condition,
                             const RoleSet& roles, const Catalog& catalog,
                             const QuestionItem& question);

/// Judgment-classification prompt with the given answer or thought text in
/// the judgment slot.
std::string render_judge_prompt(const std::string& answer_or_thought);

/// Strict judge reply contract: exactly one lowercase token among
/// yes/no/unsure (surrounding whitespace ignored). Throws JudgeFormatError.
TernaryLabel parse_judge_reply(const std::string& reply);

/// Splits a response at its last "Answer:" marker. Responses without the
/// marker come back with an empty thought and the full text as answer.
std::pair<std::string, std::string> split_thought_answer(const std::string& response);

} // namespace valsteer
