#ifndef FACTORLAB_TABLE_H_
#define FACTORLAB_TABLE_H_

#include <optional>
#include <string>
#include <vector>

#include "factorlab/dates.h"

namespace factorlab {

// Date-aligned matrix of named factor columns plus an optional binary label.
// Missing entries (warm-up rows, uncovered dates) are NaN.
struct FeatureTable {
  std::vector<Date> dates;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // columns[c][row]
  std::optional<std::vector<int>> labels;

  std::size_t Rows() const { return dates.size(); }
  std::size_t Cols() const { return names.size(); }

  // -1 when absent.
  int ColumnIndex(const std::string& name) const;
  const std::vector<double>& Column(const std::string& name) const;

  // Duplicate names are configuration errors.
  void AddColumn(const std::string& name, std::vector<double> values);

  // First row index where every column is present; Rows() when none is.
  std::size_t ValidFrom() const;

  // Keeps only the named columns, in the given order.
  FeatureTable Select(const std::vector<std::string>& keep) const;

  // Row slice [begin, end).
  FeatureTable Slice(std::size_t begin, std::size_t end) const;
};

// Delimited-text round trip with alphabetical column order and a `date`
// column (plus `label` when present). Byte-identical across runs.
void DumpFeatureTable(const FeatureTable& table, const std::string& path,
                      char delimiter = ',');
FeatureTable LoadFeatureTable(const std::string& path, char delimiter = ',');

}  // namespace factorlab

#endif  // FACTORLAB_TABLE_H_
