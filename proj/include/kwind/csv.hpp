#pragma once

// CSV emission: one quantity per file, a header line, then a "#" comment row
// carrying units and conventions.

#include <complex>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace kwind {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns, const std::string& units);

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();
  void row(std::initializer_list<double> values);

 private:
  void sep();
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::string units;
  std::vector<std::vector<double>> rows;
};

/// Reads a file written by CsvWriter; non-numeric cells become NaN.
CsvTable read_csv(const std::string& path);

}  // namespace kwind
