#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctalab/table.hpp"

namespace ctalab {

// Recipe for one semantic label: which value generator fills its columns.
struct LabelRecipe {
  std::string label;
  std::string kind;  // see kGeneratorKinds
};

struct GeneratorSpec {
  std::vector<LabelRecipe> recipes;  // >= 2 labels
  int columns_per_label = 50;
  int rows_min = 4;
  int rows_max = 12;
  int columns_per_table = 4;
  std::uint64_t seed = 42;
};

// Generator kinds available to recipes.
extern const std::vector<std::string> kGeneratorKinds;

// The stock 12-label recipe set (city, country code, date, ...).
GeneratorSpec default_generator_spec(int columns_per_label = 50,
                                     std::uint64_t seed = 42);

GeneratorSpec generator_spec_from_json(const std::string& json_text);
std::string generator_spec_to_json(const GeneratorSpec& spec);

// Deterministic function of the spec: value streams are derived per label
// so per-label generation order never interacts across labels. Columns are
// split 70/15/15 per label (largest remainder; ties favor train, then
// validation) and grouped into tables of `columns_per_table`.
CorpusSplit generate_corpus(const GeneratorSpec& spec);

}  // namespace ctalab
