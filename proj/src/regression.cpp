#include "otmap/regression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <Eigen/QR>

#include "otmap/csv.hpp"
#include "otmap/errors.hpp"

namespace otmap {

namespace {

bool is_missing(const std::string& cell) {
  std::string lower;
  for (char c : cell) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

}  // namespace

RegressionDataset make_regression_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          std::vector<std::string> names, std::string response_name) {
  if (X.rows() != y.size()) {
    throw InvalidArgument("regression data: " + std::to_string(X.rows()) + " predictor rows but " +
                          std::to_string(y.size()) + " responses");
  }
  if (X.rows() < 2 || X.cols() < 1) throw InvalidArgument("regression data: need at least 2 rows and 1 predictor");
  if (!X.allFinite() || !y.allFinite()) throw NonFiniteInput("regression data: non-finite values");
  if (names.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) {
    throw InvalidArgument("regression data: " + std::to_string(names.size()) + " names for " +
                          std::to_string(X.cols()) + " predictors");
  }

  RegressionDataset ds;
  ds.raw_X = X;
  ds.raw_y = y;
  ds.names = std::move(names);
  ds.response_name = std::move(response_name);
  const double n = static_cast<double>(X.rows());
  ds.column_means = X.colwise().mean().transpose();
  ds.column_stds.resize(X.cols());
  ds.X.resize(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Eigen::VectorXd c = X.col(j).array() - ds.column_means[j];
    const double sd = std::sqrt(c.squaredNorm() / (n - 1.0));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(ds.column_means[j])))) {
      throw StandardizationError("predictor '" + ds.names[static_cast<std::size_t>(j)] +
                                 "' has zero standard deviation");
    }
    ds.column_stds[j] = sd;
    ds.X.col(j) = c / sd;
  }
  ds.response_mean = y.mean();
  ds.y = y.array() - ds.response_mean;
  return ds;
}

RegressionDataset load_regression_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw InvalidArgument(path + ": no header line");
  const auto it = std::find(header.begin(), header.end(), response_column);
  if (it == header.end()) throw MissingColumnError(path + ": no column named '" + response_column + "'");
  const auto response_index = static_cast<std::size_t>(it - header.begin());

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw MissingValueError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (is_missing(cells[j])) {
        throw MissingValueError(path + ":" + std::to_string(line_no) + ": missing value in column '" + header[j] +
                                "'");
      }
      const auto v = parse_double(cells[j]);
      if (!v || !std::isfinite(*v)) {
        throw NonNumericCellError(path + ":" + std::to_string(line_no) + ": non-numeric value '" + cells[j] +
                                  "' in column '" + header[j] + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != response_index) names.push_back(header[j]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      const double v = rows[static_cast<std::size_t>(i)][j];
      if (j == response_index) y[i] = v;
      else X(i, c++) = v;
    }
  }
  return make_regression_dataset(X, y, std::move(names), response_column);
}

double least_squares_residual_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() <= X.cols()) {
    throw InvalidArgument("residual variance needs more rows (" + std::to_string(X.rows()) + ") than predictors (" +
                          std::to_string(X.cols()) + ")");
  }
  const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
  return (y - X * b).squaredNorm() / static_cast<double>(X.rows() - X.cols());
}

}  // namespace otmap
