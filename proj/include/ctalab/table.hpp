#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ctalab {

// One table column: an ordered list of cell strings. Numeric cells keep
// their textual form. `table_id`/`column_index` point back at the source.
struct Column {
  std::vector<std::string> values;
  std::string table_id;
  int column_index = 0;

  bool operator==(const Column&) const = default;
};

// A parsed table: equal-length columns, header row already discarded.
struct Table {
  std::string id;
  std::vector<Column> columns;
};

// Ordered set of semantic labels. Uniqueness is checked on the canonical
// (trimmed, case-folded) form; prompts always serialize labels in this order.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  bool contains(std::string_view label) const { return index_of(label) >= 0; }
  // Canonical-form lookup; -1 when absent.
  int index_of(std::string_view label) const;

  bool operator==(const LabelSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct LabeledColumn {
  Column column;
  std::string label;

  bool operator==(const LabeledColumn&) const = default;
};

struct CorpusSplit {
  std::vector<LabeledColumn> train;
  std::vector<LabeledColumn> validation;
  std::vector<LabeledColumn> test;
  LabelSpace label_space;
  // Hex config fingerprint of whatever produced this corpus.
  std::string fingerprint;

  const std::vector<LabeledColumn>& split(std::string_view name) const;
};

std::map<std::string, int> label_distribution(const std::vector<LabeledColumn>& split);

}  // namespace ctalab
