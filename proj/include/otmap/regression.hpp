#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace otmap {

// Predictors standardized to mean 0 / sample std 1 per column, response
// centered.  The raw values and the transformation are kept.
struct RegressionDataset {
  Eigen::MatrixXd X;  // n x d, standardized
  Eigen::VectorXd y;  // centered
  Eigen::MatrixXd raw_X;
  Eigen::VectorXd raw_y;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_stds;
  double response_mean = 0.0;
  std::vector<std::string> names;
  std::string response_name;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }
};

// Every column other than `response_column` is a predictor.  Empty cells or
// NA/NaN are MissingValueError, other unparsable cells NonNumericCellError, an
// absent response column MissingColumnError, a constant predictor
// StandardizationError.
RegressionDataset load_regression_csv(const std::string& path, const std::string& response_column);

RegressionDataset make_regression_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          std::vector<std::string> names = {}, std::string response_name = "y");

// Residual variance |y - X b|^2 / (n - d) of the least-squares fit.
double least_squares_residual_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace otmap
