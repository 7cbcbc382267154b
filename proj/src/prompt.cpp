#include "rubricjudge/prompt.hpp"

#include <fstream>
#include <sstream>

namespace rubricjudge {
namespace {

std::string substitute(std::string_view tpl,
                       std::span<const std::pair<std::string_view, std::string_view>> slots) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      const std::size_t close = tpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string_view name = tpl.substr(i + 1, close - i - 1);
        bool matched = false;
        for (const auto& [slot, value] : slots) {
          if (slot == name) {
            out += value;
            matched = true;
            break;
          }
        }
        if (matched) {
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tpl[i]);
    ++i;
  }
  return out;
}

void require_fields(const GradingItem& item) {
  if (item.question.empty()) throw EmptyField("question");
  if (item.reference_answer.empty()) throw EmptyField("reference_answer");
  if (item.student_answer.empty()) throw EmptyField("student_answer");
}

}  // namespace

const PromptTemplates& default_templates() {
  static const PromptTemplates kDefaults;
  return kDefaults;
}

PromptTemplates load_prompt_templates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open template file " + path.string());

  PromptTemplates tpl;
  std::string* section = nullptr;
  bool section_started = false;
  std::string line;
  auto append = [&](const std::string& text) {
    if (!section) return;
    if (section_started) section->push_back('\n');
    *section += text;
    section_started = true;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '[' && line.back() == ']') {
      const std::string name = line.substr(1, line.size() - 2);
      section_started = false;
      if (name == "single") {
        section = &tpl.single_template;
      } else if (name == "batch_header") {
        section = &tpl.batch_header_template;
      } else if (name == "batch_item") {
        section = &tpl.batch_item_template;
      } else if (name == "score_instruction.2way") {
        section = &tpl.score_instruction_2way;
      } else if (name == "score_instruction.3way") {
        section = &tpl.score_instruction_3way;
      } else if (name == "score_instruction.5way") {
        section = &tpl.score_instruction_5way;
      } else {
        throw std::runtime_error("unknown template section [" + name + "] in " + path.string());
      }
      section->clear();
      continue;
    }
    append(line);
  }
  return tpl;
}

std::string score_instruction(SchemeId scheme, const PromptTemplates& tpl) {
  switch (scheme) {
    case SchemeId::TwoWay:
      return tpl.score_instruction_2way;
    case SchemeId::ThreeWay:
      return tpl.score_instruction_3way;
    case SchemeId::FiveWay:
      return tpl.score_instruction_5way;
  }
  return {};
}

RenderedPrompt render_single(const GradingItem& item, SchemeId scheme,
                             const PromptTemplates& tpl) {
  require_fields(item);
  const std::string instruction = score_instruction(scheme, tpl);
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"instruction", item.question},
      {"reference_answer", item.reference_answer},
      {"student_answer", item.student_answer},
      {"score_instruction", instruction},
  };
  RenderedPrompt prompt;
  prompt.text = substitute(tpl.single_template, slots);
  prompt.item_ids = {item.id};
  prompt.scheme = scheme;
  prompt.batch = false;
  return prompt;
}

RenderedPrompt render_batch(std::span<const GradingItem> items, SchemeId scheme,
                            const PromptTemplates& tpl) {
  if (items.empty()) throw EmptyBatch();
  const std::string instruction = score_instruction(scheme, tpl);

  RenderedPrompt prompt;
  prompt.scheme = scheme;
  prompt.batch = true;

  const std::pair<std::string_view, std::string_view> header_slots[] = {
      {"score_instruction", instruction},
  };
  prompt.text = substitute(tpl.batch_header_template, header_slots);

  for (std::size_t k = 0; k < items.size(); ++k) {
    const GradingItem& item = items[k];
    require_fields(item);
    const std::string number = std::to_string(k + 1);
    const std::pair<std::string_view, std::string_view> slots[] = {
        {"n", number},
        {"instruction", item.question},
        {"reference_answer", item.reference_answer},
        {"student_answer", item.student_answer},
    };
    prompt.text += "\n\n";
    prompt.text += substitute(tpl.batch_item_template, slots);
    prompt.item_ids.push_back(item.id);
  }
  return prompt;
}

std::string render_paraphrase_prompt(std::string_view student_answer) {
  std::string out(kParaphraseInstruction);
  out.push_back('\n');
  out += student_answer;
  return out;
}

}  // namespace rubricjudge
