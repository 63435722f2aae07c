#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace otmap {

struct SourceSpec {
  enum class Kind { Laplace, Gaussian, TwoGaussianMixture };
  Kind kind = Kind::Gaussian;

  Eigen::Index dim = 1;
  double rate = 1.0;  // Laplace

  // Gaussian uses mean/cov; the mixture draws component 1 with probability
  // `weight` and component 2 otherwise.
  Eigen::VectorXd mean, mean2;
  Eigen::MatrixXd cov, cov2;
  double weight = 0.5;

  static SourceSpec laplace(double rate, Eigen::Index dim);
  static SourceSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static SourceSpec standard_gaussian(Eigen::Index dim);
  static SourceSpec two_gaussian_mixture(double weight, Eigen::VectorXd mean1, Eigen::MatrixXd cov1,
                                         Eigen::VectorXd mean2, Eigen::MatrixXd cov2);
};

// N x D matrix of i.i.d. draws; reproducible for a given seed.
Eigen::MatrixXd sample_source(const SourceSpec& spec, Eigen::Index n, std::uint64_t seed);

}  // namespace otmap
