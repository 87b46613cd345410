#include "ctalab/csv.hpp"

#include "ctalab/error.hpp"

namespace ctalab {

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;

  const auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  const auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        end_field();
        row_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        row_started = true;
        break;
    }
  }
  if (in_quotes) throw Error(ErrorCode::MalformedRecord, "unterminated quoted field");
  if (row_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

Table parse_table(std::string_view csv_text, std::string id) {
  auto rows = parse_csv_rows(csv_text);
  if (rows.size() < 2) {
    throw Error(ErrorCode::EmptyTable, "table '" + id + "' has no data rows");
  }
  const std::size_t width = rows[0].size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw Error(ErrorCode::RaggedRows,
                  "table '" + id + "' row " + std::to_string(r) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected " +
                      std::to_string(width));
    }
  }

  Table table;
  table.id = std::move(id);
  table.columns.resize(width);
  for (std::size_t c = 0; c < width; ++c) {
    auto& col = table.columns[c];
    col.table_id = table.id;
    col.column_index = static_cast<int>(c);
    col.values.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      col.values.push_back(rows[r][c]);
    }
  }
  return table;
}

std::string csv_escape(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string write_csv_rows(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_escape(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace ctalab
