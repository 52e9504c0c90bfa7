#include "kwind/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "kwind/errors.hpp"

namespace kwind {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& units)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw ArgumentError("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n# " << units << "\n";
}

void CsvWriter::sep() {
  if (filled_ >= columns_) throw StateError("CSV row has more cells than columns");
  if (filled_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out_.write(buf, r.ptr - buf);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw StateError("CSV row is incomplete");
  out_ << '\n';
  filled_ = 0;
}

void CsvWriter::row(std::initializer_list<double> values) {
  for (double v : values) *this << v;
  end_row();
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError(path + " is empty");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.units = line.substr(line.size() > 1 ? 2 : 1);
      continue;
    }
    std::vector<double> row;
    std::stringstream rs(line);
    for (std::string cell; std::getline(rs, cell, ',');) {
      double v = std::numeric_limits<double>::quiet_NaN();
      std::from_chars(cell.data(), cell.data() + cell.size(), v);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace kwind
