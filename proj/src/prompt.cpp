#include "ctalab/prompt.hpp"

#include <fstream>

#include "ctalab/error.hpp"
#include "ctalab/strings.hpp"
#include "ctalab/tokenizer.hpp"

namespace ctalab {

namespace {

void replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
  const auto pos = text.find(placeholder);
  if (pos == std::string::npos) return;
  text.replace(pos, placeholder.size(), value);
}

void validate_scaffold(const PromptTemplate& tmpl) {
  if (count_occurrences(tmpl.scaffold, "{values}") != 1 ||
      count_occurrences(tmpl.scaffold, "{labels}") != 1 ||
      count_occurrences(tmpl.scaffold, "{instruction}") > 1) {
    throw Error(ErrorCode::FormatError,
                "template '" + tmpl.id +
                    "' must use {values} and {labels} exactly once and "
                    "{instruction} at most once");
  }
}

TemplateRole role_from_string(std::string_view s) {
  if (s == "train") return TemplateRole::Train;
  if (s == "test") return TemplateRole::Test;
  if (s == "both") return TemplateRole::Both;
  throw Error(ErrorCode::FormatError, "unknown template role '" + std::string(s) + "'");
}

}  // namespace

std::string serialize_values(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += "'";
    out += values[i];
    out += "'";
  }
  out += "]";
  return out;
}

std::string serialize_labels(const std::vector<std::string>& labels) {
  return join(labels, ", ");
}

RenderedPrompt render(const PromptTemplate& tmpl, const PromptComponents& comps) {
  if (comps.sampled_values.empty()) {
    throw Error(ErrorCode::InvalidArgument, "prompt needs at least one sampled value");
  }
  if (comps.label_options.empty()) {
    throw Error(ErrorCode::InvalidArgument, "prompt needs a non-empty label list");
  }
  std::string text = tmpl.scaffold;
  replace_once(text, "{instruction}", comps.task_instruction);
  replace_once(text, "{values}", serialize_values(comps.sampled_values));
  replace_once(text, "{labels}", serialize_labels(comps.label_options));

  RenderedPrompt out;
  out.text = std::move(text);
  out.template_id = tmpl.id;
  return out;
}

PromptComponents fit_to_budget(const PromptTemplate& tmpl, PromptComponents comps,
                               int max_tokens, const Tokenizer& tokenizer,
                               int* dropped_count) {
  if (dropped_count) *dropped_count = 0;
  int dropped = 0;
  while (true) {
    const auto rendered = render(tmpl, comps);
    const auto tokens = tokenizer.encode(rendered.text);
    if (static_cast<int>(tokens.size()) <= max_tokens) break;
    if (comps.sampled_values.size() <= 1) {
      throw Error(ErrorCode::BudgetTooSmall,
                  "prompt for template '" + tmpl.id + "' needs " +
                      std::to_string(tokens.size()) + " tokens with one value, budget is " +
                      std::to_string(max_tokens));
    }
    comps.sampled_values.pop_back();
    ++dropped;
  }
  if (dropped_count) *dropped_count = dropped;
  return comps;
}

const std::vector<PromptTemplate>& template_registry() {
  static const std::vector<PromptTemplate> registry = {
      {"p1",
       "INSTRUCTION: {instruction} OPTIONS: {labels} INPUT: {values} Answer:",
       "Select the option which best describes the input.", TemplateRole::Both},
      {"p2", "Column: {values}. {instruction} Labels: {labels} Output:",
       "Pick the column's label.", TemplateRole::Both},
      {"p3", "{instruction} Column: {values} Labels: {labels} Answer:",
       "Pick the column's semantic label.", TemplateRole::Both},
      {"p4",
       "Pick the column's class. I mean if you want to. It would be cool, I "
       "think. Anyway, give it a try, I guess? Here's the column itself! "
       "{values} And, um, here are some column names you could pick from ... "
       "{labels} OK, go ahead!",
       "Pick the column's class.", TemplateRole::Test},
      {"p5",
       "Given the input column: {values}, choose the most appropriate label "
       "from the following options and return only the label. OPTIONS: {labels}",
       "Choose the most appropriate label.", TemplateRole::Test},
  };
  return registry;
}

std::vector<PromptTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open template file '" + path.string() + "'");
  }
  std::vector<PromptTemplate> out;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (!saw_header) {
      if (line != "ctalab-templates\t1") {
        throw Error(ErrorCode::FormatError, where + ": expected 'ctalab-templates\t1' header");
      }
      saw_header = true;
      continue;
    }
    // template <id> <role> <scaffold...>; the scaffold may contain tabs.
    auto fields = split(line, '\t');
    if (fields.size() < 4 || fields[0] != "template") {
      throw Error(ErrorCode::FormatError, where + ": expected 'template\tid\trole\tscaffold'");
    }
    PromptTemplate tmpl;
    tmpl.id = fields[1];
    tmpl.role = role_from_string(fields[2]);
    tmpl.scaffold = fields[3];
    for (std::size_t i = 4; i < fields.size(); ++i) {
      tmpl.scaffold += "\t" + fields[i];
    }
    validate_scaffold(tmpl);
    for (const auto& existing : out) {
      if (existing.id == tmpl.id) {
        throw Error(ErrorCode::FormatError, where + ": duplicate template id '" + tmpl.id + "'");
      }
    }
    out.push_back(std::move(tmpl));
  }
  return out;
}

const PromptTemplate& find_template(std::string_view id,
                                    const std::vector<PromptTemplate>& extra) {
  for (const auto& tmpl : extra) {
    if (tmpl.id == id) return tmpl;
  }
  for (const auto& tmpl : template_registry()) {
    if (tmpl.id == id) return tmpl;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown template '" + std::string(id) + "'");
}

}  // namespace ctalab
