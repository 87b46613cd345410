#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ctalab/sampling.hpp"

namespace ctalab {

class Tokenizer;

// The three prompt pieces: task instruction, sampled column values and the
// serialized label options.
struct PromptComponents {
  std::string task_instruction;
  std::vector<std::string> sampled_values;
  std::vector<std::string> label_options;
};

enum class TemplateRole { Train, Test, Both };

inline bool can_train(TemplateRole role) { return role != TemplateRole::Test; }
inline bool can_test(TemplateRole role) { return role != TemplateRole::Train; }

// A structural prompt pattern. The scaffold is literal text with
// {instruction}, {values} and {labels} placeholders; {values}/{labels}
// appear exactly once, {instruction} at most once (templates whose
// instruction wording is part of the scaffold omit it).
struct PromptTemplate {
  std::string id;
  std::string scaffold;
  std::string default_instruction;
  TemplateRole role = TemplateRole::Both;
};

struct RenderedPrompt {
  std::string text;
  std::string template_id;
  SamplingKind sampling_kind = SamplingKind::Shortest;
  std::string table_id;
  int column_index = 0;
  int truncated_value_count = 0;
};

// "['London', 'Boston']" — the serialized form of sampled values.
std::string serialize_values(const std::vector<std::string>& values);
// "Location, Organization, Person" — the serialized label options.
std::string serialize_labels(const std::vector<std::string>& labels);

// Deterministic scaffold fill; no randomness, no truncation.
RenderedPrompt render(const PromptTemplate& tmpl, const PromptComponents& comps);

// Drops values from the end of comps.sampled_values until the rendered
// prompt fits max_tokens under the given tokenizer. Labels and instruction
// are never dropped; failing to fit even one value raises BudgetTooSmall.
PromptComponents fit_to_budget(const PromptTemplate& tmpl, PromptComponents comps,
                               int max_tokens, const Tokenizer& tokenizer,
                               int* dropped_count = nullptr);

// The five built-in templates p1..p5 (p1-p3 train+test, p4-p5 test-only).
const std::vector<PromptTemplate>& template_registry();

// Extra templates from a plain-text file:
//   ctalab-templates 1
//   template <id> <train|test|both> <scaffold...>
// (tab-separated; the scaffold is the remainder of the line).
std::vector<PromptTemplate> load_templates(const std::filesystem::path& path);

// Looks up by id in `extra` first, then the built-in registry.
const PromptTemplate& find_template(std::string_view id,
                                    const std::vector<PromptTemplate>& extra = {});

}  // namespace ctalab
