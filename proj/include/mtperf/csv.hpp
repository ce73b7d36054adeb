#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtperf {

// Parsed comma-separated table. Fields are plain (no quoting dialect): none
// of the bundled or emitted files ever contain embedded commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, header excluded

  // Column index for `name`, or -1 when absent.
  int column(const std::string& name) const;
};

// Reads a CSV stream; rejects ragged rows (with the 1-based line number) and
// tolerates trailing carriage returns and a trailing newline.
CsvTable read_csv(std::istream& in, const std::string& origin);
CsvTable read_csv_file(const std::string& path);

// Fixed-point decimal rendering used everywhere numbers are emitted, so
// output files diff stably. NaN renders as "NA".
std::string format_fixed(double value, int decimals);

// Whole file as a string (binary-faithful).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mtperf
