#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace otmap {

struct CsvMatrix {
  Eigen::MatrixXd data;              // one row per record
  std::vector<std::string> header;   // empty when the file has none
};

// Numeric CSV, optional header line.  A first line with any non-numeric field
// is taken as the header.
CsvMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& data,
                      const std::vector<std::string>& header = {});

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

// Comma split with surrounding whitespace and double quotes stripped.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace otmap
