#include "ctalab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ctalab/error.hpp"
#include "ctalab/rng.hpp"

namespace ctalab {

const char* to_string(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::Archetype: return "archetype";
    case SamplingKind::Random: return "random";
    case SamplingKind::Shortest: return "shortest";
  }
  return "?";
}

SamplingKind sampling_kind_from_string(std::string_view name) {
  if (name == "archetype") return SamplingKind::Archetype;
  if (name == "random") return SamplingKind::Random;
  if (name == "shortest") return SamplingKind::Shortest;
  throw Error(ErrorCode::InvalidArgument,
              "unknown sampling kind '" + std::string(name) + "'");
}

std::vector<std::string> sample_values(const Column& column,
                                       const SamplingStrategy& strategy) {
  if (column.values.empty()) {
    throw Error(ErrorCode::EmptyColumn,
                "cannot sample from empty column " + column.table_id + ":" +
                    std::to_string(column.column_index));
  }
  if (strategy.budget_k < 1) {
    throw Error(ErrorCode::InvalidArgument, "budget_k must be >= 1");
  }
  const std::size_t n = column.values.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(strategy.budget_k), n);

  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  switch (strategy.kind) {
    case SamplingKind::Archetype:
      std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return column.values[a].size() > column.values[b].size();
      });
      break;
    case SamplingKind::Shortest:
      std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
        return column.values[a].size() < column.values[b].size();
      });
      break;
    case SamplingKind::Random: {
      Rng rng(strategy.seed);
      // Partial Fisher-Yates: the first k slots are the sample.
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(indices[i], indices[j]);
      }
      break;
    }
  }

  indices.resize(k);
  std::sort(indices.begin(), indices.end());  // restore original row order
  std::vector<std::string> out;
  out.reserve(k);
  for (auto i : indices) out.push_back(column.values[i]);
  return out;
}

std::vector<LabeledColumn> stratified_select(const std::vector<LabeledColumn>& columns,
                                             double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::FractionOutOfRange,
                "fraction must be in (0, 1], got " + std::to_string(fraction));
  }

  // Group input positions by label.
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    by_label[columns[i].label].push_back(i);
  }

  const long long total =
      static_cast<long long>(std::floor(fraction * static_cast<double>(columns.size()) + 0.5));

  // Largest-remainder allocation of fraction * n_label per label.
  struct Share {
    const std::string* label;
    std::size_t count;
    long long base;
    double remainder;
  };
  std::vector<Share> shares;
  long long assigned = 0;
  for (const auto& [label, idx] : by_label) {
    const double quota = fraction * static_cast<double>(idx.size());
    Share s;
    s.label = &label;
    s.count = idx.size();
    s.base = static_cast<long long>(std::floor(quota + 1e-9));
    s.remainder = quota - static_cast<double>(s.base);
    assigned += s.base;
    shares.push_back(s);
  }
  std::stable_sort(shares.begin(), shares.end(), [](const Share& a, const Share& b) {
    if (std::abs(a.remainder - b.remainder) > 1e-12) return a.remainder > b.remainder;
    if (a.count != b.count) return a.count > b.count;  // tie: more frequent label first
    return *a.label < *b.label;
  });
  std::map<std::string, long long> alloc;
  for (const auto& s : shares) alloc[*s.label] = s.base;
  for (long long left = total - assigned; left > 0; --left) {
    for (auto& s : shares) {
      if (s.remainder > -0.5) {  // each label receives at most one extra unit
        alloc[*s.label] += 1;
        s.remainder = -1.0;
        break;
      }
    }
  }

  // Uniform without-replacement choice inside each label, seeded per label.
  std::vector<char> selected(columns.size(), 0);
  for (const auto& [label, idx] : by_label) {
    const auto want = static_cast<std::size_t>(alloc[label]);
    if (want >= idx.size()) {
      for (auto i : idx) selected[i] = 1;
      continue;
    }
    Rng rng(derive_seed(seed, {"stratified", label}));
    std::vector<std::size_t> pool = idx;
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < want; ++i) selected[pool[i]] = 1;
  }

  std::vector<LabeledColumn> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (selected[i]) out.push_back(columns[i]);
  }
  return out;
}

}  // namespace ctalab
