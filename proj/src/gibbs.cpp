#include "otmap/gibbs.hpp"

#include <cmath>

#include "otmap/errors.hpp"
#include "otmap/stats.hpp"

namespace otmap {

double sample_truncated_standard_normal(double lower, std::mt19937_64& rng) {
  if (lower <= 0.0) {
    std::normal_distribution<double> normal;
    while (true) {
      const double z = normal(rng);
      if (z >= lower) return z;
    }
  }
  // Exponential proposal with the optimal rate (Robert 1995).
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  std::exponential_distribution<double> expo(rate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (true) {
    const double z = lower + expo(rng);
    const double d = z - rate;
    if (unif(rng) <= std::exp(-0.5 * d * d)) return z;
  }
}

double sample_lasso_conditional(double a, double b, double lambda, std::mt19937_64& rng) {
  const double sd = 1.0 / std::sqrt(a);
  const double mu_pos = (b - lambda) / a;
  const double mu_neg = (b + lambda) / a;
  // Log masses of the x > 0 and x < 0 pieces, common factors dropped.
  const double log_pos = 0.5 * a * mu_pos * mu_pos + log_normal_cdf(mu_pos / sd);
  const double log_neg = 0.5 * a * mu_neg * mu_neg + log_normal_cdf(-mu_neg / sd);
  const double hi = std::max(log_pos, log_neg);
  const double p_pos = std::exp(log_pos - hi) / (std::exp(log_pos - hi) + std::exp(log_neg - hi));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < p_pos) return mu_pos + sd * sample_truncated_standard_normal(-mu_pos / sd, rng);
  return mu_neg - sd * sample_truncated_standard_normal(mu_neg / sd, rng);
}

Eigen::MatrixXd gibbs_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double lambda, double sigma2,
                            const GibbsConfig& cfg) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidArgument("gibbs: lambda must be > 0");
  if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw InvalidArgument("gibbs: sigma2 must be > 0");
  if (A.rows() != y.size()) throw InvalidArgument("gibbs: design and response sizes differ");
  if (cfg.burn_in < 0 || cfg.draws < 1) throw InvalidArgument("gibbs: need burn_in >= 0 and draws >= 1");
  const Eigen::Index d = A.cols();
  const Eigen::MatrixXd gram = A.transpose() * A / sigma2;
  const Eigen::VectorXd aty = A.transpose() * y / sigma2;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(gram(j, j) > 0)) throw InvalidArgument("gibbs: predictor " + std::to_string(j + 1) + " is all zero");
  }

  std::mt19937_64 rng(cfg.seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd out(cfg.draws, d);
  for (int sweep = 0; sweep < cfg.burn_in + cfg.draws; ++sweep) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double a = gram(j, j);
      const double b = aty[j] - gram.row(j).dot(x) + a * x[j];
      x[j] = sample_lasso_conditional(a, b, lambda, rng);
      if (!std::isfinite(x[j])) throw NumericError("gibbs: non-finite draw for coordinate " + std::to_string(j + 1));
    }
    if (sweep >= cfg.burn_in) out.row(sweep - cfg.burn_in) = x.transpose();
  }
  return out;
}

}  // namespace otmap
