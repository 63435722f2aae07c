#include "otmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "otmap/csv.hpp"
#include "otmap/errors.hpp"

namespace otmap {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(normal_cdf(x));  // erfc keeps full relative accuracy here
  // Mills-ratio expansion: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 ...).
  const double z = 1.0 / (x * x);
  const double series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z))));
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0 && q <= 1)) throw InvalidArgument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw InvalidArgument("KS test of an empty sample");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  // Stephens' small-sample correction of the asymptotic distribution.
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

double ks_two_sample(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() == 0 || b.size() == 0) throw InvalidArgument("KS statistic of an empty sample");
  std::vector<double> x(a.data(), a.data() + a.size()), y(b.data(), b.data() + b.size());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

PosteriorSummary summarize_posterior(const Eigen::MatrixXd& samples, const std::vector<std::string>& names,
                                     const std::string& method) {
  if (samples.rows() == 0 || samples.cols() == 0) throw InvalidArgument("posterior summary of an empty sample set");
  const Eigen::Index d = samples.cols();
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != d) {
    throw InvalidArgument("posterior summary: " + std::to_string(names.size()) + " names for " + std::to_string(d) +
                          " coordinates");
  }
  PosteriorSummary s;
  s.method = method;
  s.count = samples.rows();
  s.names = names;
  if (s.names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) s.names.push_back("x" + std::to_string(j + 1));
  }
  s.median.resize(d);
  s.q025.resize(d);
  s.q975.resize(d);
  s.mean.resize(d);
  s.std.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd c = samples.col(j);
    const std::vector<double> v(c.data(), c.data() + c.size());
    s.median[j] = quantile(v, 0.5);
    s.q025[j] = quantile(v, 0.025);
    s.q975[j] = quantile(v, 0.975);
    s.mean[j] = c.mean();
    s.std[j] = c.size() > 1 ? std::sqrt((c.array() - s.mean[j]).square().sum() / static_cast<double>(c.size() - 1))
                            : 0.0;
  }
  return s;
}

void write_summary_csv(const std::string& path, const PosteriorSummary& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "name,median,q2.5,q97.5,mean,std\n";
  for (Eigen::Index j = 0; j < s.median.size(); ++j) {
    out << s.names[static_cast<std::size_t>(j)] << ',' << format_double(s.median[j]) << ','
        << format_double(s.q025[j]) << ',' << format_double(s.q975[j]) << ',' << format_double(s.mean[j]) << ','
        << format_double(s.std[j]) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace otmap
