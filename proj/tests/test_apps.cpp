#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Cholesky>

#include "oracles.hpp"
#include "otmap/errors.hpp"
#include "otmap/gibbs.hpp"
#include "otmap/lasso_pipeline.hpp"
#include "otmap/regression.hpp"
#include "otmap/sampling.hpp"
#include "otmap/stats.hpp"

using namespace otmap;

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// sup_x |F_n(x) - Phi(x)| by direct evaluation at the order statistics.
double ks_statistic_direct(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double f = phi_cdf(v[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("otmap_apps_" + name);
  std::ofstream(path) << text;
  return path;
}

Eigen::VectorXd col_median(const Eigen::MatrixXd& s) {
  Eigen::VectorXd m(s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    std::vector<double> v(s.col(j).data(), s.col(j).data() + s.rows());
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    m[j] = v[v.size() / 2];
  }
  return m;
}

Eigen::VectorXd col_std(const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd c = s.rowwise() - s.colwise().mean();
  return (c.colwise().squaredNorm() / static_cast<double>(s.rows() - 1)).cwiseSqrt().transpose();
}

RegressionDataset synthetic(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta) {
  oracle::Gen g(seed);
  const Eigen::MatrixXd X = g.normal_matrix(n, beta.size());
  const Eigen::VectorXd y = X * beta + g.normal_vector(n);
  return make_regression_dataset(X, y);
}

}  // namespace

TEST_CASE("laplace source moments") {
  const Eigen::MatrixXd s = sample_source(SourceSpec::laplace(1.0, 1), 100000, 3);
  CHECK(std::abs(s.mean()) < 0.02);
  const double var = (s.array() - s.mean()).square().sum() / (s.size() - 1.0);
  CHECK(std::abs(var - 2.0) < 0.1);
  const Eigen::MatrixXd s2 = sample_source(SourceSpec::laplace(4.0, 3), 100000, 4);
  for (int j = 0; j < 3; ++j) CHECK(s2.col(j).cwiseAbs().mean() == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("gaussian source passes a normality test") {
  const Eigen::MatrixXd s = sample_source(SourceSpec::standard_gaussian(2), 5000, 7);
  for (int j = 0; j < 2; ++j) {
    const KsResult ks = ks_test_normal(s.col(j));
    CHECK(ks.p_value > 0.01);
    CHECK(ks.statistic == doctest::Approx(ks_statistic_direct(s.col(j))).epsilon(1e-12));
  }
  Eigen::Matrix2d cov;
  cov << 4, 1, 1, 2;
  const Eigen::MatrixXd g = sample_source(SourceSpec::gaussian(Eigen::Vector2d(1, -2), cov), 200000, 8);
  CHECK((oracle::sample_mean(g) - Eigen::Vector2d(1, -2)).cwiseAbs().maxCoeff() < 0.02);
  CHECK((oracle::sample_cov(g) - cov).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("mixture source draws each component with its weight") {
  const auto spec = SourceSpec::two_gaussian_mixture(0.3, Eigen::Vector2d(5, 0), Eigen::Matrix2d::Identity(),
                                                     Eigen::Vector2d(-5, 0), Eigen::Matrix2d::Identity());
  const Eigen::MatrixXd s = sample_source(spec, 50000, 9);
  const double frac = (s.col(0).array() > 0).cast<double>().mean();
  CHECK(std::abs(frac - 0.3) < 0.01);
}

TEST_CASE("sources are seed-deterministic") {
  const auto mix = SourceSpec::two_gaussian_mixture(0.4, Eigen::Vector2d(1, 1), Eigen::Matrix2d::Identity(),
                                                    Eigen::Vector2d(-1, -1), Eigen::Matrix2d::Identity());
  for (const auto& spec : {SourceSpec::laplace(1.5, 3), SourceSpec::standard_gaussian(3), mix}) {
    const Eigen::MatrixXd a = sample_source(spec, 500, 42), b = sample_source(spec, 500, 42);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
    CHECK(a != sample_source(spec, 500, 43));
  }
  CHECK_THROWS_AS(sample_source(SourceSpec::laplace(-1.0, 2), 10, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_source(SourceSpec::standard_gaussian(2), 0, 1), InvalidArgument);
}

TEST_CASE("normal cdf and its log") {
  for (double x : {-5.0, -1.3, 0.0, 0.7, 3.0}) CHECK(normal_cdf(x) == doctest::Approx(phi_cdf(x)).epsilon(1e-14));
  for (double x : {-3.0, 0.0, 2.0}) CHECK(log_normal_cdf(x) == doctest::Approx(std::log(phi_cdf(x))).epsilon(1e-12));
  // Mills-ratio asymptotics deep in the lower tail.
  for (double x : {-40.0, -200.0}) {
    const double want =
        -0.5 * x * x - std::log(-x * std::sqrt(2 * M_PI)) + std::log1p(-1 / (x * x) + 3 / std::pow(x, 4));
    CHECK(log_normal_cdf(x) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("truncated normal draws") {
  std::mt19937_64 rng(1);
  for (double lower : {-1.0, 2.0, 10.0}) {
    double sum = 0;
    double lowest = INFINITY;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double v = sample_truncated_standard_normal(lower, rng);
      sum += v;
      lowest = std::min(lowest, v);
    }
    const double want = std::exp(-0.5 * lower * lower) / std::sqrt(2 * M_PI) / phi_cdf(-lower);
    CHECK(lowest >= lower);
    CHECK(sum / n == doctest::Approx(want).epsilon(0.01));
  }
}

TEST_CASE("lasso full conditional matches its density") {
  // Empirical CDF against a fine quadrature of exp(-a x^2/2 + b x - lambda |x|).
  struct Case {
    double a, b, lambda;
  };
  std::mt19937_64 rng(2);
  for (const Case c : {Case{1.0, 0.0, 1.0}, Case{4.0, 3.0, 0.5}, Case{0.5, -2.0, 3.0}, Case{200.0, 10.0, 40.0}}) {
    CAPTURE(c.a);
    const int n = 100000;
    std::vector<double> draws(n);
    for (double& v : draws) v = sample_lasso_conditional(c.a, c.b, c.lambda, rng);
    std::sort(draws.begin(), draws.end());
    const double sd = 1 / std::sqrt(c.a), lo = draws.front() - 10 * sd, hi = draws.back() + 10 * sd;
    const int m = 200000;
    const double h = (hi - lo) / m;
    std::vector<double> cdf(m + 1, 0.0);
    double peak = -INFINITY;
    for (int k = 0; k <= m; ++k) {
      const double x = lo + k * h;
      peak = std::max(peak, -c.a * x * x / 2 + c.b * x - c.lambda * std::abs(x));
    }
    double acc = 0;
    for (int k = 1; k <= m; ++k) {
      auto f = [&](double x) { return std::exp(-c.a * x * x / 2 + c.b * x - c.lambda * std::abs(x) - peak); };
      acc += 0.5 * h * (f(lo + (k - 1) * h) + f(lo + k * h));
      cdf[k] = acc;
    }
    double dmax = 0;
    for (int i = 0; i < n; i += 97) {
      const int k = std::clamp(static_cast<int>((draws[i] - lo) / h), 0, m);
      dmax = std::max(dmax, std::abs((i + 0.5) / n - cdf[k] / acc));
    }
    CHECK(dmax < 0.01);
  }
}

TEST_CASE("gibbs sampler: weak prior recovers least squares") {
  oracle::Gen g(3);
  const int n = 500;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Ones(n, 1);
  const Eigen::VectorXd y = (0.8 + g.normal_vector(n).array()).matrix();
  const Eigen::MatrixXd s = gibbs_lasso(A, y, 1e-3, 1.0, {1000, 5000, 1});
  const double post_sd = 1 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s.mean() - y.mean()) < 2 * post_sd);
  CHECK(col_std(s)[0] == doctest::Approx(post_sd).epsilon(0.1));
}

TEST_CASE("gibbs sampler: strong prior concentrates at zero") {
  const auto ds = synthetic(4, 100, Eigen::Vector3d(1.0, -0.5, 0.2));
  const Eigen::MatrixXd s = gibbs_lasso(ds.X, ds.y, 1e4, 1.0, {500, 2000, 2});
  CHECK(col_median(s).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("gibbs sampler: two seeds agree") {
  const auto ds = synthetic(5, 200, Eigen::Vector3d(1.0, 0.0, -0.6));
  const double s2 = least_squares_residual_variance(ds.X, ds.y);
  const Eigen::MatrixXd a = gibbs_lasso(ds.X, ds.y, 2.0, s2, {3000, 10000, 11});
  const Eigen::MatrixXd b = gibbs_lasso(ds.X, ds.y, 2.0, s2, {3000, 10000, 12});
  REQUIRE(a.rows() == 10000);
  const Eigen::VectorXd sd = col_std(a);
  CHECK(((col_median(a) - col_median(b)).array().abs() / sd.array()).maxCoeff() < 0.05);
  const Eigen::MatrixXd c = gibbs_lasso(ds.X, ds.y, 2.0, s2, {3000, 10000, 11});
  CHECK(a == c);
  CHECK_THROWS_AS(gibbs_lasso(ds.X, ds.y, -1.0, s2), InvalidArgument);
}

TEST_CASE("quantiles and posterior summaries") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.25) == 1.75);
  CHECK_THROWS(quantile({}, 0.5));
  const Eigen::MatrixXd s = sample_source(SourceSpec::standard_gaussian(1), 100000, 13);
  const PosteriorSummary sum = summarize_posterior(s, {"z"}, "gibbs");
  CHECK(std::abs(sum.q975[0] - 1.96) < 0.03);
  CHECK(std::abs(sum.q025[0] + 1.96) < 0.03);
  CHECK(sum.count == 100000);
  CHECK(sum.method == "gibbs");

  oracle::Gen g(14);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd r = g.normal_matrix(g.integer(1, 40), 3, g.uniform(0.1, 10));
    const PosteriorSummary ps = summarize_posterior(r);
    CHECK((ps.q025.array() <= ps.median.array()).all());
    CHECK((ps.median.array() <= ps.q975.array()).all());
    CHECK(ps.names.size() == 3);
  }
  CHECK_THROWS(summarize_posterior(Eigen::MatrixXd(0, 2)));
}

TEST_CASE("summary csv layout") {
  const Eigen::MatrixXd s = (Eigen::MatrixXd(3, 2) << 1, 10, 2, 20, 3, 30).finished();
  const auto path = std::filesystem::temp_directory_path() / "otmap_apps_summary.csv";
  write_summary_csv(path.string(), summarize_posterior(s, {"a", "b"}));
  std::ifstream in(path);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "name,median,q2.5,q97.5,mean,std");
  CHECK(first.rfind("a,2,", 0) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("regression csv loading and standardization") {
  const auto two = write_temp("two.csv", "a,b,y\n1.5,-2,3.25\n0.5,4,1\n");
  const RegressionDataset ds = load_regression_csv(two.string(), "y");
  CHECK(ds.raw_X == (Eigen::MatrixXd(2, 2) << 1.5, -2, 0.5, 4).finished());
  CHECK(ds.raw_y == Eigen::Vector2d(3.25, 1));
  CHECK(ds.names == std::vector<std::string>{"a", "b"});

  oracle::Gen g(15);
  const Eigen::MatrixXd X = g.normal_matrix(50, 4, 7.0).rowwise() + Eigen::RowVector4d(1, -3, 100, 0);
  const RegressionDataset std_ds = make_regression_dataset(X, g.normal_vector(50) + Eigen::VectorXd::Constant(50, 9));
  CHECK(std_ds.X.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
  CHECK((col_std(std_ds.X).array() - 1).abs().maxCoeff() < 1e-10);
  CHECK(std::abs(std_ds.y.mean()) < 1e-10);

  CHECK_THROWS_AS(load_regression_csv(write_temp("const.csv", "a,b,y\n1,2,3\n1,5,6\n1,3,2\n").string(), "y"),
                  StandardizationError);
  CHECK_THROWS_AS(load_regression_csv(write_temp("miss.csv", "a,b,y\n1,,3\n2,5,6\n").string(), "y"), MissingValueError);
  CHECK_THROWS_AS(load_regression_csv(write_temp("na.csv", "a,b,y\n1,NA,3\n2,5,6\n").string(), "y"),
                  MissingValueError);
  CHECK_THROWS_AS(load_regression_csv(write_temp("txt.csv", "a,b,y\n1,x7,3\n2,5,6\n").string(), "y"),
                  NonNumericCellError);
  CHECK_THROWS_AS(load_regression_csv(two.string(), "price"), MissingColumnError);
}

TEST_CASE("boston housing file") {
  const RegressionDataset ds = load_regression_csv(std::string(OTMAP_DATA_DIR) + "/boston_housing.csv", "MEDV");
  CHECK(ds.n() == 506);
  CHECK(ds.d() == 13);
}

TEST_CASE("least-squares residual variance") {
  oracle::Gen g(16);
  const Eigen::MatrixXd X = g.normal_matrix(40, 3);
  const Eigen::VectorXd y = g.normal_vector(40);
  const Eigen::VectorXd b = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK(least_squares_residual_variance(X, y) == doctest::Approx((y - X * b).squaredNorm() / 37).epsilon(1e-10));
}

TEST_CASE("transport posterior agrees with gibbs in two dimensions") {
  const auto ds = synthetic(17, 100, Eigen::Vector2d(1.0, 0.0));
  const double s2 = least_squares_residual_variance(ds.X, ds.y);
  LassoTransportConfig cfg;
  cfg.seed = 18;
  cfg.solver.workers = 1;
  const auto tr = bayes_lasso_transport(ds, 2.0, s2, cfg);
  CHECK(tr.converged);
  REQUIRE(tr.samples.rows() == 2000);
  const Eigen::MatrixXd gb = gibbs_lasso(ds.X, ds.y, 2.0, s2, {3000, 10000, 19});
  const Eigen::VectorXd sd = col_std(gb);
  for (int j = 0; j < 2; ++j) {
    CAPTURE(j);
    CHECK(std::abs(col_median(tr.samples)[j] - col_median(gb)[j]) < 0.1 * sd[j]);
    CHECK(ks_two_sample(tr.samples.col(j), gb.col(j)) < 0.1);
  }
}

TEST_CASE("nearly flat prior gives the conjugate gaussian posterior") {
  oracle::Gen g(20);
  const Eigen::MatrixXd A = g.normal_matrix(200, 1);
  const Eigen::VectorXd y = 0.7 * A.col(0) + g.normal_vector(200);
  const RegressionDataset ds = make_regression_dataset(A, y);
  const double s2 = 1.0, lambda = 0.05;
  LassoTransportConfig cfg;
  cfg.seed = 21;
  cfg.solver.workers = 1;
  const auto tr = bayes_lasso_transport(ds, lambda, s2, cfg);
  const double ata = ds.X.squaredNorm();
  const double mean = ds.X.col(0).dot(ds.y) / ata, sd = std::sqrt(s2 / ata);
  const Eigen::VectorXd z = (tr.samples.col(0).array() - mean) / sd;
  CHECK(std::abs(z.mean()) < 0.1);
  CHECK(std::abs(col_std(z)[0] - 1) < 0.1);
}
