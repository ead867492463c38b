#ifndef ASL_CSV_HPP
#define ASL_CSV_HPP

#include <optional>
#include <string>
#include <vector>

namespace asl {

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);
std::string format_number(const std::optional<double>& value);  // empty when absent

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Cells of one named column; throws if the column does not exist.
  std::vector<std::string> column(const std::string& name) const;

  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal reader for the tables written above: header row, comma separated, no quoting.
CsvTable parse_csv(const std::string& text);

}  // namespace asl

#endif  // ASL_CSV_HPP
