#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubricjudge/core.hpp"

namespace rubricjudge {

struct RenderedPrompt {
  std::string text;
  std::vector<std::string> item_ids;
  SchemeId scheme;
  bool batch = false;
};

struct EmptyField : std::runtime_error {
  explicit EmptyField(const std::string& field)
      : std::runtime_error("empty field \"" + field + "\""), field_name(field) {}
  std::string field_name;
};
struct EmptyBatch : std::runtime_error {
  EmptyBatch() : std::runtime_error("batch prompt needs at least one item") {}
};

// Prompt text lives in data, not code: the defaults below are the shipped
// grading templates, and any section can be overridden from a template file
// (see load_prompt_templates). Placeholders: {instruction} (the question),
// {reference_answer}, {student_answer}, {score_instruction}, and {n} for the
// batch item number. Lines are joined with "\n"; rendered prompts have no
// trailing newline.
struct PromptTemplates {
  std::string single_template =
      "You are an expert grader.\n"
      "Question: {instruction}\n"
      "Reference Answer: {reference_answer}\n"
      "Student Answer: {student_answer}\n"
      "{score_instruction}";
  std::string batch_header_template =
      "You are an expert grader.\n"
      "Grade each student answer below independently.\n"
      "{score_instruction}\n"
      "For each item, respond on its own line using exactly the format:\n"
      "Item <n>: Score: <label> - <brief justification>\n"
      "Use the item numbers exactly as provided below.";
  std::string batch_item_template =
      "Item {n}\n"
      "Question: {instruction}\n"
      "Reference Answer: {reference_answer}\n"
      "Student Answer: {student_answer}";
  std::string score_instruction_2way =
      "Provide a score using the 2-way scheme where 0=correct, 1=incorrect. "
      "Respond with `Score: <label>' followed by a brief justification.";
  std::string score_instruction_3way =
      "Provide a score using the 3-way scheme where 0=correct, 1=contradictory, "
      "2=incorrect. Respond with `Score: <label>' followed by a brief justification.";
  std::string score_instruction_5way =
      "Provide a score using the 5-way scheme where 0=correct, 1=contradictory, "
      "2=partially correct incomplete, 3=irrelevant, 4=non domain. Respond with "
      "`Score: <label>' followed by a brief justification.";
};

// Override file format: lines "[single]", "[batch_header]", "[batch_item]",
// "[score_instruction.2way]" (.3way/.5way) start a section; the section body
// runs to the next header, without the final newline. Unlisted sections keep
// their defaults.
PromptTemplates load_prompt_templates(const std::filesystem::path& path);

const PromptTemplates& default_templates();

std::string score_instruction(SchemeId scheme, const PromptTemplates& tpl = default_templates());

RenderedPrompt render_single(const GradingItem& item, SchemeId scheme,
                             const PromptTemplates& tpl = default_templates());

RenderedPrompt render_batch(std::span<const GradingItem> items, SchemeId scheme,
                            const PromptTemplates& tpl = default_templates());

// The fixed instruction used when a backend rewrites a student answer.
inline constexpr std::string_view kParaphraseInstruction =
    "Paraphrase the following student answer without changing its meaning:";

std::string render_paraphrase_prompt(std::string_view student_answer);

}  // namespace rubricjudge
