#include "mtperf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "mtperf/error.hpp"

namespace mtperf {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(std::istream& in, const std::string& origin) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      table.header = split_fields(line);
      continue;
    }
    if (line.empty()) continue;  // ignore blank trailing lines
    auto fields = split_fields(line);
    if (fields.size() != table.header.size()) {
      throw Error(errc::malformed_row,
                  origin + " line " + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (lineno == 0) {
    throw Error(errc::malformed_row, origin + ": missing header row");
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_failure, "cannot open " + path);
  return read_csv(in, path);
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string s(buf);
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    // Normalize negative zero so reruns never differ on sign of zero.
    bool all_zero = true;
    for (char c : s) {
      if (c != '-' && c != '0' && c != '.') all_zero = false;
    }
    if (all_zero) s.erase(0, 1);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_failure, "cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(errc::io_failure, "cannot write " + path);
  out << content;
  if (!out) throw Error(errc::io_failure, "write failed for " + path);
}

}  // namespace mtperf
