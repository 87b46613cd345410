#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctalab/prompt.hpp"
#include "ctalab/table.hpp"

namespace ctalab {

// One rendered training pair: prompt text x and target label y.
struct PromptInstance {
  std::string input_text;
  std::string target_label;
  std::string template_id;
  SamplingKind sampling_kind = SamplingKind::Shortest;
  std::string table_id;
  int column_index = 0;
  std::uint64_t seed_used = 0;

  bool operator==(const PromptInstance&) const = default;
};

struct DatasetBuildConfig {
  std::vector<std::string> templates = {"p1", "p2", "p3"};
  // Template/strategy pairing; anything absent falls back to the stock
  // pairing p1->archetype, p2->random, p3->shortest.
  std::map<std::string, SamplingKind> pairing;
  int budget_k = 5;
  int max_tokens = 224;
  std::uint64_t seed = 42;
  std::vector<PromptTemplate> extra_templates;
};

SamplingKind paired_strategy(const DatasetBuildConfig& config, const std::string& template_id);

// One instance per (column, template): |result| = |columns| * |templates|.
// Random sampling seeds are derived per instance from (seed, source,
// template), so results do not depend on build order. Output is sorted by
// (table id, column index, template id).
std::vector<PromptInstance> build_dataset(const std::vector<LabeledColumn>& columns,
                                          const LabelSpace& label_space,
                                          const DatasetBuildConfig& config);

struct Dataset {
  std::vector<PromptInstance> instances;
  std::string fingerprint;
  std::string corpus_fingerprint;
  std::string config_json;  // build config echo, for traceability
};

// Line-delimited JSON: one header record, then one record per instance.
void serialize_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset deserialize_dataset(const std::filesystem::path& path);

std::string build_config_to_json(const DatasetBuildConfig& config);

}  // namespace ctalab
