#ifndef NRTLID_CSV_HPP
#define NRTLID_CSV_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace nrtlid {

// Shortest representation that parses back to the identical double
// (std::to_chars), so golden files are portable and byte-stable.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);

  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }

 private:
  std::ofstream out_;
  std::size_t n_columns_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace nrtlid

#endif
