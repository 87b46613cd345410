#include "ctalab/table.hpp"

#include <set>

#include "ctalab/error.hpp"
#include "ctalab/strings.hpp"

namespace ctalab {

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "label space must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    auto canon = canonical_label(label);
    if (canon.empty()) {
      throw Error(ErrorCode::InvalidArgument, "blank label in label space");
    }
    if (!seen.insert(canon).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate label '" + label + "'");
    }
  }
}

int LabelSpace::index_of(std::string_view label) const {
  const auto canon = canonical_label(label);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (canonical_label(labels_[i]) == canon) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<LabeledColumn>& CorpusSplit::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "validation") return validation;
  if (name == "test") return test;
  throw Error(ErrorCode::InvalidArgument, "unknown split '" + std::string(name) + "'");
}

std::map<std::string, int> label_distribution(const std::vector<LabeledColumn>& split) {
  std::map<std::string, int> counts;
  for (const auto& lc : split) ++counts[lc.label];
  return counts;
}

}  // namespace ctalab
