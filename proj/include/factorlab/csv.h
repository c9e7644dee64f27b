#ifndef FACTORLAB_CSV_H_
#define FACTORLAB_CSV_H_

#include <string>
#include <vector>

namespace factorlab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // -1 when absent.
  int ColumnIndex(const std::string& name) const;
};

// Header row required. Quoting is not interpreted; cells are trimmed.
CsvTable ReadCsv(const std::string& path, char delimiter = ',');

void WriteCsv(const std::string& path, const CsvTable& table,
              char delimiter = ',');

std::vector<std::string> SplitDelimited(const std::string& line,
                                        char delimiter);

// Shortest round-trip rendering of a double, NaN as empty cell.
std::string FormatCell(double value);

}  // namespace factorlab

#endif  // FACTORLAB_CSV_H_
