#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace otmap {

double normal_cdf(double x);
// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);

// Linear interpolation between order statistics (type 7): q in [0, 1].
double quantile(std::vector<double> values, double q);

// One-sample Kolmogorov-Smirnov test against N(0, 1).
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_test_normal(const Eigen::Ref<const Eigen::VectorXd>& values);
// sup |F_a - F_b| of the two empirical CDFs.
double ks_two_sample(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);
// Asymptotic Kolmogorov tail probability Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

struct PosteriorSummary {
  std::string method;
  std::vector<std::string> names;
  Eigen::VectorXd median, q025, q975, mean, std;
  Eigen::Index count = 0;
};

// Rows of `samples` are draws.
PosteriorSummary summarize_posterior(const Eigen::MatrixXd& samples, const std::vector<std::string>& names = {},
                                     const std::string& method = "");

// CSV with header name,median,q2.5,q97.5,mean,std.
void write_summary_csv(const std::string& path, const PosteriorSummary& s);

}  // namespace otmap
