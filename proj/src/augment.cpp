#include "ctalab/augment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/rng.hpp"
#include "ctalab/tokenizer.hpp"

namespace ctalab {

namespace {

constexpr const char* kDatasetFormat = "ctalab-dataset";
constexpr int kDatasetVersion = 1;

// Tokenizer used only to measure prompt budgets at build time. It covers
// every cell value, label and scaffold word, so unit counts match any
// tokenizer later built over the rendered dataset texts.
Tokenizer budget_tokenizer(const std::vector<LabeledColumn>& columns,
                           const LabelSpace& label_space,
                           const DatasetBuildConfig& config) {
  std::vector<std::string> texts;
  for (const auto& lc : columns) {
    for (const auto& value : lc.column.values) texts.push_back(value);
  }
  for (const auto& label : label_space.labels()) texts.push_back(label);
  for (const auto& id : config.templates) {
    const auto& tmpl = find_template(id, config.extra_templates);
    texts.push_back(tmpl.scaffold);
    texts.push_back(tmpl.default_instruction);
  }
  return Tokenizer::build(texts);
}

}  // namespace

SamplingKind paired_strategy(const DatasetBuildConfig& config,
                             const std::string& template_id) {
  if (const auto it = config.pairing.find(template_id); it != config.pairing.end()) {
    return it->second;
  }
  if (template_id == "p1") return SamplingKind::Archetype;
  if (template_id == "p2") return SamplingKind::Random;
  if (template_id == "p3") return SamplingKind::Shortest;
  throw Error(ErrorCode::InvalidArgument,
              "no sampling strategy paired with template '" + template_id + "'");
}

std::vector<PromptInstance> build_dataset(const std::vector<LabeledColumn>& columns,
                                          const LabelSpace& label_space,
                                          const DatasetBuildConfig& config) {
  if (columns.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot build a dataset from zero columns");
  }
  if (config.templates.empty()) {
    throw Error(ErrorCode::InvalidArgument, "dataset build needs at least one template");
  }
  std::set<std::string> seen;
  for (const auto& id : config.templates) {
    const auto& tmpl = find_template(id, config.extra_templates);
    if (!can_train(tmpl.role)) {
      throw Error(ErrorCode::InvalidArgument,
                  "template '" + id + "' is test-only and cannot build training data");
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate template '" + id + "'");
    }
  }

  const Tokenizer tokenizer = budget_tokenizer(columns, label_space, config);

  std::vector<PromptInstance> out;
  out.reserve(columns.size() * config.templates.size());
  for (const auto& lc : columns) {
    if (!label_space.contains(lc.label)) {
      throw Error(ErrorCode::UnknownLabel,
                  "column label '" + lc.label + "' is outside the label space");
    }
    for (const auto& id : config.templates) {
      const auto& tmpl = find_template(id, config.extra_templates);

      SamplingStrategy strategy;
      strategy.kind = paired_strategy(config, id);
      strategy.budget_k = config.budget_k;
      strategy.seed = derive_seed(config.seed, {lc.column.table_id,
                                                std::to_string(lc.column.column_index), id});

      PromptComponents comps;
      comps.task_instruction = tmpl.default_instruction;
      comps.sampled_values = sample_values(lc.column, strategy);
      comps.label_options = label_space.labels();
      comps = fit_to_budget(tmpl, std::move(comps), config.max_tokens, tokenizer);

      PromptInstance instance;
      instance.input_text = render(tmpl, comps).text;
      instance.target_label = lc.label;
      instance.template_id = id;
      instance.sampling_kind = strategy.kind;
      instance.table_id = lc.column.table_id;
      instance.column_index = lc.column.column_index;
      instance.seed_used = strategy.seed;
      out.push_back(std::move(instance));
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const PromptInstance& a, const PromptInstance& b) {
    if (a.table_id != b.table_id) return a.table_id < b.table_id;
    if (a.column_index != b.column_index) return a.column_index < b.column_index;
    return a.template_id < b.template_id;
  });
  return out;
}

std::string build_config_to_json(const DatasetBuildConfig& config) {
  nlohmann::json pairing = nlohmann::json::object();
  for (const auto& [id, kind] : config.pairing) pairing[id] = to_string(kind);
  nlohmann::json j = {
      {"templates", config.templates},
      {"pairing", pairing},
      {"budget_k", config.budget_k},
      {"max_tokens", config.max_tokens},
      {"seed", config.seed},
  };
  return j.dump();
}

void serialize_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write dataset '" + path.string() + "'");
  }
  nlohmann::json header = {
      {"format", kDatasetFormat},
      {"version", kDatasetVersion},
      {"fingerprint", dataset.fingerprint},
      {"corpus_fingerprint", dataset.corpus_fingerprint},
      {"config", dataset.config_json},
      {"count", dataset.instances.size()},
  };
  out << header.dump() << '\n';
  for (const auto& instance : dataset.instances) {
    nlohmann::json j = {
        {"input", instance.input_text},
        {"target", instance.target_label},
        {"template", instance.template_id},
        {"sampling", to_string(instance.sampling_kind)},
        {"table", instance.table_id},
        {"column", instance.column_index},
        {"seed", instance.seed_used},
    };
    out << j.dump() << '\n';
  }
}

Dataset deserialize_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open dataset '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": missing dataset header");
  }

  Dataset dataset;
  std::size_t expected = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != kDatasetFormat ||
        header.at("version").get<int>() != kDatasetVersion) {
      throw Error(ErrorCode::FormatError, path.string() + ": not a ctalab dataset v1 file");
    }
    dataset.fingerprint = header.value("fingerprint", "");
    dataset.corpus_fingerprint = header.value("corpus_fingerprint", "");
    dataset.config_json = header.value("config", "");
    expected = header.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord,
                path.string() + ": bad dataset header: " + e.what());
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PromptInstance instance;
      instance.input_text = j.at("input").get<std::string>();
      instance.target_label = j.at("target").get<std::string>();
      instance.template_id = j.at("template").get<std::string>();
      instance.sampling_kind = sampling_kind_from_string(j.at("sampling").get<std::string>());
      instance.table_id = j.at("table").get<std::string>();
      instance.column_index = j.at("column").get<int>();
      instance.seed_used = j.at("seed").get<std::uint64_t>();
      dataset.instances.push_back(std::move(instance));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (dataset.instances.size() != expected) {
    throw Error(ErrorCode::MalformedRecord,
                path.string() + ": expected " + std::to_string(expected) + " records, found " +
                    std::to_string(dataset.instances.size()));
  }
  return dataset;
}

}  // namespace ctalab
