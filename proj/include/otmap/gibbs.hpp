#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace otmap {

struct GibbsConfig {
  int burn_in = 3000;
  int draws = 10000;
  std::uint64_t seed = 0;
};

// Coordinate-wise Gibbs sampler for the Bayesian LASSO with fixed noise
// variance: y | x ~ N(A x, sigma2 I), x_j ~ Laplace(0, 1/lambda) i.i.d.
// Each full conditional is a two-piece mixture of truncated normals.
// Returns draws x rows after discarding burn_in sweeps.
Eigen::MatrixXd gibbs_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double lambda, double sigma2,
                            const GibbsConfig& cfg = {});

// One draw of x_j from density proportional to exp(-a x^2 / 2 + b x - lambda |x|).
double sample_lasso_conditional(double a, double b, double lambda, std::mt19937_64& rng);

// Standard normal restricted to [lower, inf).
double sample_truncated_standard_normal(double lower, std::mt19937_64& rng);

}  // namespace otmap
