#include "factorlab/table.h"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "factorlab/common.h"
#include "factorlab/csv.h"

namespace factorlab {

int FeatureTable::ColumnIndex(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

const std::vector<double>& FeatureTable::Column(const std::string& name) const {
  const int idx = ColumnIndex(name);
  if (idx < 0) {
    throw DataError("unknown column: " + name);
  }
  return columns[static_cast<std::size_t>(idx)];
}

void FeatureTable::AddColumn(const std::string& name,
                             std::vector<double> values) {
  if (ColumnIndex(name) >= 0) {
    throw ConfigError("duplicate column: " + name);
  }
  if (values.size() != dates.size()) {
    throw DataError("column " + name + " length " +
                    std::to_string(values.size()) + " != table rows " +
                    std::to_string(dates.size()));
  }
  names.push_back(name);
  columns.push_back(std::move(values));
}

std::size_t FeatureTable::ValidFrom() const {
  for (std::size_t row = 0; row < Rows(); ++row) {
    bool complete = true;
    for (const auto& col : columns) {
      if (IsMissing(col[row])) {
        complete = false;
        break;
      }
    }
    if (complete) {
      return row;
    }
  }
  return Rows();
}

FeatureTable FeatureTable::Select(const std::vector<std::string>& keep) const {
  FeatureTable out;
  out.dates = dates;
  out.labels = labels;
  for (const auto& name : keep) {
    out.AddColumn(name, Column(name));
  }
  return out;
}

FeatureTable FeatureTable::Slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > Rows()) {
    throw DataError("invalid slice");
  }
  FeatureTable out;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.names = names;
  out.columns.reserve(columns.size());
  for (const auto& col : columns) {
    out.columns.emplace_back(col.begin() + begin, col.begin() + end);
  }
  if (labels.has_value()) {
    out.labels.emplace(labels->begin() + begin, labels->begin() + end);
  }
  return out;
}

void DumpFeatureTable(const FeatureTable& table, const std::string& path,
                      char delimiter) {
  std::vector<std::size_t> order(table.Cols());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.names[a] < table.names[b];
  });

  CsvTable csv;
  csv.header.push_back("date");
  for (std::size_t c : order) {
    csv.header.push_back(table.names[c]);
  }
  if (table.labels.has_value()) {
    csv.header.push_back("label");
  }
  csv.rows.reserve(table.Rows());
  for (std::size_t row = 0; row < table.Rows(); ++row) {
    std::vector<std::string> cells;
    cells.reserve(csv.header.size());
    cells.push_back(FormatDate(table.dates[row]));
    for (std::size_t c : order) {
      cells.push_back(FormatCell(table.columns[c][row]));
    }
    if (table.labels.has_value()) {
      const int label = (*table.labels)[row];
      cells.push_back(label < 0 ? "" : std::to_string(label));
    }
    csv.rows.push_back(std::move(cells));
  }
  WriteCsv(path, csv, delimiter);
}

FeatureTable LoadFeatureTable(const std::string& path, char delimiter) {
  const CsvTable csv = ReadCsv(path, delimiter);
  const int date_col = csv.ColumnIndex("date");
  if (date_col < 0) {
    throw SchemaError(path + ": missing date column");
  }
  const int label_col = csv.ColumnIndex("label");

  FeatureTable table;
  table.dates.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    table.dates.push_back(ParseDate(row[date_col]));
  }
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    if (static_cast<int>(c) == date_col || static_cast<int>(c) == label_col) {
      continue;
    }
    std::vector<double> values;
    values.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
      const std::string& cell = row[c];
      if (cell.empty()) {
        values.push_back(NaN());
        continue;
      }
      double v = 0.0;
      auto result = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (result.ec != std::errc() || result.ptr != cell.data() + cell.size()) {
        throw FormatError(path + ": bad numeric cell '" + cell +
                          "' in column " + csv.header[c]);
      }
      values.push_back(v);
    }
    table.AddColumn(csv.header[c], std::move(values));
  }
  if (label_col >= 0) {
    std::vector<int> labels;
    labels.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
      const std::string& cell = row[label_col];
      labels.push_back(cell.empty() ? -1 : std::stoi(cell));
    }
    table.labels = std::move(labels);
  }
  return table;
}

}  // namespace factorlab
