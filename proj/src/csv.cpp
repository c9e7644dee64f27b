#include "factorlab/csv.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "factorlab/common.h"

namespace factorlab {

namespace {

std::string Trim(const std::string& text) {
  std::size_t begin = 0;
  while (begin < text.size() &&
         std::isspace(static_cast<unsigned char>(text[begin])) != 0) {
    ++begin;
  }
  std::size_t end = text.size();
  while (end > begin &&
         std::isspace(static_cast<unsigned char>(text[end - 1])) != 0) {
    --end;
  }
  return text.substr(begin, end - begin);
}

}  // namespace

int CsvTable::ColumnIndex(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<std::string> SplitDelimited(const std::string& line,
                                        char delimiter) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::string cell;
    // Skip leading blanks so a quoted cell may follow padding.
    std::size_t start = pos;
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) {
      ++start;
    }
    if (start < line.size() && line[start] == '"') {
      // Quoted cell; "" inside is a literal quote.
      std::size_t i = start + 1;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        cell.push_back(line[i]);
        ++i;
      }
      while (i < line.size() && line[i] != delimiter) {
        ++i;
      }
      out.push_back(std::move(cell));
      if (i >= line.size()) {
        return out;
      }
      pos = i + 1;
    } else {
      const std::size_t end = line.find(delimiter, pos);
      if (end == std::string::npos) {
        out.push_back(Trim(line.substr(pos)));
        return out;
      }
      out.push_back(Trim(line.substr(pos, end - pos)));
      pos = end + 1;
    }
    if (pos == line.size()) {
      out.emplace_back();
      return out;
    }
  }
}

CsvTable ReadCsv(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw FormatError("cannot open file: " + path);
  }
  CsvTable table;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto cells = SplitDelimited(line, delimiter);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw FormatError(path + ": row " + std::to_string(row_number) +
                        " has " + std::to_string(cells.size()) +
                        " cells, expected " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) {
    throw FormatError(path + ": missing header row");
  }
  return table;
}

namespace {

void WriteCell(std::ofstream& out, const std::string& cell, char delimiter) {
  if (cell.find(delimiter) == std::string::npos &&
      cell.find('"') == std::string::npos) {
    out << cell;
    return;
  }
  out << '"';
  for (char c : cell) {
    if (c == '"') {
      out << '"';
    }
    out << c;
  }
  out << '"';
}

}  // namespace

void WriteCsv(const std::string& path, const CsvTable& table, char delimiter) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw DataError("cannot write file: " + path);
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) {
      out << delimiter;
    }
    WriteCell(out, table.header[i], delimiter);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) {
        out << delimiter;
      }
      WriteCell(out, row[i], delimiter);
    }
    out << '\n';
  }
  if (!out.good()) {
    throw DataError("write failed: " + path);
  }
}

std::string FormatCell(double value) {
  if (IsMissing(value)) {
    return "";
  }
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace factorlab
