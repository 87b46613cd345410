#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ctalab/table.hpp"

namespace ctalab {

enum class SamplingKind { Archetype, Random, Shortest };

const char* to_string(SamplingKind kind);
SamplingKind sampling_kind_from_string(std::string_view name);

struct SamplingStrategy {
  SamplingKind kind = SamplingKind::Shortest;
  int budget_k = 5;
  std::uint64_t seed = 0;  // consumed by Random only
};

// Picks min(budget_k, |column|) cell values. Archetype keeps the longest
// values (character length, ties to the earlier row), Shortest the
// shortest, Random a seeded uniform subset without replacement. Output
// always preserves the column's original row order.
std::vector<std::string> sample_values(const Column& column,
                                       const SamplingStrategy& strategy);

// Stratified subset of labeled columns: per-label counts follow a
// largest-remainder allocation of fraction * n_label (ties favor the more
// frequent label, then the lexicographically smaller one); within a label
// columns are chosen uniformly without replacement. The result keeps the
// input order, so fraction 1.0 is the identity.
std::vector<LabeledColumn> stratified_select(const std::vector<LabeledColumn>& columns,
                                             double fraction, std::uint64_t seed);

}  // namespace ctalab
