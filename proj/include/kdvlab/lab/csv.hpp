#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace kdvlab::lab {

inline constexpr int kCsvSchemaVersion = 1;

/// CSV with a versioned comment header:
///   # kdvlab-csv v1 kind=<kind> config_hash=<hex> [key=value ...]
/// followed by the column row. Numbers use the shortest round-trip form.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& kind, const std::string& config_hash,
            const std::vector<std::string>& columns, const std::map<std::string, std::string>& tags = {});

  CsvWriter& operator<<(double x);
  CsvWriter& operator<<(long long x);
  CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
  CsvWriter& operator<<(const std::string& s);
  /// Ends the current row; throws if the cell count differs from the header.
  void end_row();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void sep();

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t cells_ = 0;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws std::runtime_error naming the missing column.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace kdvlab::lab
