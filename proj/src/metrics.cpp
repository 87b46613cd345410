#include "ctalab/metrics.hpp"

#include <algorithm>

#include "ctalab/error.hpp"
#include "ctalab/strings.hpp"

namespace ctalab {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

std::string remap_to_label_space(std::string_view raw, const LabelSpace& labels) {
  if (labels.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot remap onto an empty label space");
  }
  const auto& all = labels.labels();

  // 1. exact match
  for (const auto& label : all) {
    if (raw == label) return label;
  }
  // 2. trimmed, case-folded match
  const std::string canon = canonical_label(raw);
  for (const auto& label : all) {
    if (canon == canonical_label(label)) return label;
  }
  // 3. unique substring containment
  const std::string* contained = nullptr;
  bool unique = true;
  for (const auto& label : all) {
    if (canon.find(canonical_label(label)) != std::string::npos) {
      if (contained) {
        unique = false;
        break;
      }
      contained = &label;
    }
  }
  if (contained && unique) return *contained;
  // 4. minimum edit distance, ties broken lexicographically
  const std::string* best = nullptr;
  std::size_t best_distance = 0;
  for (const auto& label : all) {
    const std::size_t d = levenshtein(canon, canonical_label(label));
    if (!best || d < best_distance || (d == best_distance && label < *best)) {
      best = &label;
      best_distance = d;
    }
  }
  return *best;
}

std::map<std::string, double> per_label_f1(std::span<const PredictionRecord> records) {
  if (records.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no prediction records");
  }
  struct Counts {
    long long tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& r : records) {
    if (r.gold_label == r.mapped_label) {
      ++counts[r.gold_label].tp;
    } else {
      ++counts[r.gold_label].fn;
      ++counts[r.mapped_label].fp;
    }
  }
  std::map<std::string, double> f1;
  for (const auto& [label, c] : counts) {
    const long long denom = 2 * c.tp + c.fp + c.fn;
    f1[label] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
  }
  return f1;
}

double weighted_f1(std::span<const PredictionRecord> records) {
  const auto f1 = per_label_f1(records);
  std::map<std::string, long long> gold_counts;
  for (const auto& r : records) ++gold_counts[r.gold_label];
  const double total = static_cast<double>(records.size());
  double sum = 0.0;
  for (const auto& [label, n] : gold_counts) {
    sum += (static_cast<double>(n) / total) * f1.at(label);
  }
  return sum;
}

}  // namespace ctalab
