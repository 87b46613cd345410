#include "ctalab/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "ctalab/csv.hpp"
#include "ctalab/error.hpp"
#include "ctalab/fingerprint.hpp"
#include "ctalab/strings.hpp"

namespace ctalab {

namespace {

constexpr const char* kManifestMagic = "ctalab-manifest";
constexpr int kManifestVersion = 1;

struct ColumnRecord {
  std::string split;
  std::string table_path;
  int column_index;
  std::string label;
};

Column extract_column(const Table& table, int index, const std::string& where) {
  if (index < 0 || index >= static_cast<int>(table.columns.size())) {
    throw Error(ErrorCode::MalformedRecord,
                where + ": column index " + std::to_string(index) +
                    " out of range for table '" + table.id + "'");
  }
  Column col = table.columns[static_cast<std::size_t>(index)];
  // Empty cells are rectangular-padding artifacts; drop them.
  std::erase(col.values, std::string());
  if (col.values.empty()) {
    throw Error(ErrorCode::EmptyColumn,
                where + ": column " + std::to_string(index) + " of table '" +
                    table.id + "' has no non-empty cells");
  }
  return col;
}

}  // namespace

CorpusSplit load_labeled_corpus(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw Error(ErrorCode::MissingFile,
                "cannot open manifest '" + manifest_path.string() + "'");
  }

  std::vector<std::string> declared_labels;
  std::vector<ColumnRecord> records;
  std::string embedded_fingerprint;
  bool saw_header = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = manifest_path.string() + ":" + std::to_string(line_no);
    auto fields = split(line, '\t');
    if (!saw_header) {
      if (fields.size() != 2 || fields[0] != kManifestMagic ||
          fields[1] != std::to_string(kManifestVersion)) {
        throw Error(ErrorCode::FormatError,
                    where + ": expected '" + std::string(kManifestMagic) + "\t" +
                        std::to_string(kManifestVersion) + "' header");
      }
      saw_header = true;
      continue;
    }
    const auto& kind = fields[0];
    if (kind == "fingerprint") {
      if (fields.size() != 2) {
        throw Error(ErrorCode::MalformedRecord, where + ": fingerprint record needs 1 field");
      }
      embedded_fingerprint = fields[1];
    } else if (kind == "label") {
      if (fields.size() != 2 || trim(fields[1]).empty()) {
        throw Error(ErrorCode::MalformedRecord, where + ": label record needs 1 non-blank field");
      }
      declared_labels.push_back(fields[1]);
    } else if (kind == "column") {
      if (fields.size() != 5) {
        throw Error(ErrorCode::MalformedRecord,
                    where + ": column record needs 4 fields (split, table, index, label)");
      }
      ColumnRecord rec;
      rec.split = fields[1];
      rec.table_path = fields[2];
      try {
        rec.column_index = std::stoi(fields[3]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRecord, where + ": bad column index '" + fields[3] + "'");
      }
      rec.label = fields[4];
      if (rec.split != "train" && rec.split != "validation" && rec.split != "test") {
        throw Error(ErrorCode::MalformedRecord, where + ": unknown split '" + rec.split + "'");
      }
      records.push_back(std::move(rec));
    } else {
      throw Error(ErrorCode::MalformedRecord, where + ": unknown record kind '" + kind + "'");
    }
  }
  if (!saw_header) {
    throw Error(ErrorCode::FormatError,
                manifest_path.string() + ": missing manifest header");
  }
  if (records.empty()) {
    throw Error(ErrorCode::EmptyTable,
                manifest_path.string() + ": manifest lists no columns");
  }

  // Label space: declared order, or first-appearance order when inferred.
  std::vector<std::string> labels = declared_labels;
  if (labels.empty()) {
    for (const auto& rec : records) {
      if (std::none_of(labels.begin(), labels.end(), [&](const std::string& l) {
            return canonical_label(l) == canonical_label(rec.label);
          })) {
        labels.push_back(rec.label);
      }
    }
  }

  CorpusSplit corpus;
  corpus.label_space = LabelSpace(labels);
  corpus.fingerprint = embedded_fingerprint.empty()
                           ? file_fingerprint(manifest_path.string())
                           : embedded_fingerprint;

  const auto base_dir = manifest_path.parent_path();
  std::map<std::string, Table> tables;
  for (const auto& rec : records) {
    auto it = tables.find(rec.table_path);
    if (it == tables.end()) {
      const auto path = base_dir / rec.table_path;
      std::ifstream table_in(path);
      if (!table_in) {
        throw Error(ErrorCode::MissingFile, "cannot open table '" + path.string() + "'");
      }
      std::ostringstream buf;
      buf << table_in.rdbuf();
      it = tables.emplace(rec.table_path,
                          parse_table(buf.str(), path.stem().string()))
               .first;
    }
    if (!corpus.label_space.contains(rec.label)) {
      throw Error(ErrorCode::UnknownLabel,
                  "label '" + rec.label + "' is outside the declared label space");
    }
    LabeledColumn lc;
    lc.column = extract_column(it->second, rec.column_index, rec.table_path);
    // Keep the label space's spelling so downstream comparisons are exact.
    lc.label = corpus.label_space.labels()[static_cast<std::size_t>(
        corpus.label_space.index_of(rec.label))];
    if (rec.split == "train") {
      corpus.train.push_back(std::move(lc));
    } else if (rec.split == "validation") {
      corpus.validation.push_back(std::move(lc));
    } else {
      corpus.test.push_back(std::move(lc));
    }
  }
  return corpus;
}

void save_corpus(const CorpusSplit& corpus, const std::filesystem::path& dir,
                 const std::string& manifest_name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "tables");

  // Re-materialize each referenced table. Unreferenced column slots are
  // written as empty filler columns so (table id, column index) pairs
  // survive a save/load round trip.
  struct TableSink {
    int width = 0;
    std::size_t height = 0;
    std::map<int, const std::vector<std::string>*> columns;
  };
  std::map<std::string, TableSink> sinks;
  const auto visit = [&](const std::vector<LabeledColumn>& split) {
    for (const auto& lc : split) {
      auto& sink = sinks[lc.column.table_id];
      sink.width = std::max(sink.width, lc.column.column_index + 1);
      sink.height = std::max(sink.height, lc.column.values.size());
      sink.columns[lc.column.column_index] = &lc.column.values;
    }
  };
  visit(corpus.train);
  visit(corpus.validation);
  visit(corpus.test);

  for (const auto& [table_id, sink] : sinks) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(sink.height + 1);
    std::vector<std::string> header;
    for (int c = 0; c < sink.width; ++c) header.push_back("c" + std::to_string(c));
    rows.push_back(std::move(header));
    for (std::size_t r = 0; r < sink.height; ++r) {
      std::vector<std::string> row(static_cast<std::size_t>(sink.width));
      for (const auto& [index, values] : sink.columns) {
        if (r < values->size()) row[static_cast<std::size_t>(index)] = (*values)[r];
      }
      rows.push_back(std::move(row));
    }
    std::ofstream out(dir / "tables" / (table_id + ".csv"), std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write table '" + table_id + "'");
    }
    out << write_csv_rows(rows);
  }

  std::ofstream out(dir / manifest_name, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError,
                "cannot write manifest '" + (dir / manifest_name).string() + "'");
  }
  out << kManifestMagic << '\t' << kManifestVersion << '\n';
  if (!corpus.fingerprint.empty()) out << "fingerprint\t" << corpus.fingerprint << '\n';
  for (const auto& label : corpus.label_space.labels()) out << "label\t" << label << '\n';
  const auto emit = [&](const char* split, const std::vector<LabeledColumn>& columns) {
    for (const auto& lc : columns) {
      out << "column\t" << split << "\ttables/" << lc.column.table_id << ".csv\t"
          << lc.column.column_index << '\t' << lc.label << '\n';
    }
  };
  emit("train", corpus.train);
  emit("validation", corpus.validation);
  emit("test", corpus.test);
}

}  // namespace ctalab
