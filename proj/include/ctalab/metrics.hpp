#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctalab/table.hpp"

namespace ctalab {

struct PredictionRecord {
  std::string table_id;
  int column_index = 0;
  std::string template_id;
  std::string raw_output;
  std::string mapped_label;
  std::string gold_label;
};

std::size_t levenshtein(std::string_view a, std::string_view b);

// Total remap of free-form model output onto the label space:
// exact match, then trimmed/case-folded match, then unique substring
// containment, then minimum edit distance (ties lexicographic).
std::string remap_to_label_space(std::string_view raw, const LabelSpace& labels);

// Multiclass per-label F1 = 2TP / (2TP + FP + FN). Labels absent from both
// gold and predictions are left out of the map.
std::map<std::string, double> per_label_f1(std::span<const PredictionRecord> records);

// Per-label F1 averaged with gold-frequency weights n_label / N.
double weighted_f1(std::span<const PredictionRecord> records);

}  // namespace ctalab
