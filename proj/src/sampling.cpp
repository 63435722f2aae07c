#include "otmap/sampling.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "otmap/errors.hpp"

namespace otmap {

namespace {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov, Eigen::Index dim, const char* who) {
  if (cov.rows() != dim || cov.cols() != dim) {
    throw InvalidArgument(std::string(who) + ": covariance must be " + std::to_string(dim) + "x" +
                          std::to_string(dim));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !cov.isApprox(cov.transpose(), 1e-12)) {
    throw InvalidArgument(std::string(who) + ": covariance is not symmetric positive definite");
  }
  return llt.matrixL();
}

}  // namespace

SourceSpec SourceSpec::laplace(double rate, Eigen::Index dim) {
  SourceSpec s;
  s.kind = Kind::Laplace;
  s.rate = rate;
  s.dim = dim;
  return s;
}

SourceSpec SourceSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  SourceSpec s;
  s.kind = Kind::Gaussian;
  s.dim = mean.size();
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  return s;
}

SourceSpec SourceSpec::standard_gaussian(Eigen::Index dim) {
  return gaussian(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

SourceSpec SourceSpec::two_gaussian_mixture(double weight, Eigen::VectorXd mean1, Eigen::MatrixXd cov1,
                                            Eigen::VectorXd mean2, Eigen::MatrixXd cov2) {
  SourceSpec s;
  s.kind = Kind::TwoGaussianMixture;
  s.dim = mean1.size();
  s.weight = weight;
  s.mean = std::move(mean1);
  s.cov = std::move(cov1);
  s.mean2 = std::move(mean2);
  s.cov2 = std::move(cov2);
  return s;
}

Eigen::MatrixXd sample_source(const SourceSpec& spec, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  if (spec.dim < 1) throw InvalidArgument("sample dimension must be >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out(n, spec.dim);

  switch (spec.kind) {
    case SourceSpec::Kind::Laplace: {
      if (!(spec.rate > 0) || !std::isfinite(spec.rate)) throw InvalidArgument("laplace source: rate must be > 0");
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < spec.dim; ++j) {
          // Inverse CDF; u in [0, 1) keeps the logarithm finite.
          const double u = unif(rng) - 0.5;
          const double mag = -std::log1p(-2.0 * std::abs(u)) / spec.rate;
          out(i, j) = u < 0 ? -mag : mag;
        }
      }
      return out;
    }
    case SourceSpec::Kind::Gaussian: {
      if (spec.mean.size() != spec.dim) throw InvalidArgument("gaussian source: mean has the wrong dimension");
      const Eigen::MatrixXd L = cholesky_factor(spec.cov, spec.dim, "gaussian source");
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(spec.dim);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < spec.dim; ++j) z[j] = normal(rng);
        out.row(i) = (spec.mean + L * z).transpose();
      }
      return out;
    }
    case SourceSpec::Kind::TwoGaussianMixture: {
      if (!(spec.weight >= 0 && spec.weight <= 1)) throw InvalidArgument("mixture source: weight must be in [0, 1]");
      if (spec.mean.size() != spec.dim || spec.mean2.size() != spec.dim) {
        throw InvalidArgument("mixture source: component means have the wrong dimension");
      }
      const Eigen::MatrixXd L1 = cholesky_factor(spec.cov, spec.dim, "mixture source");
      const Eigen::MatrixXd L2 = cholesky_factor(spec.cov2, spec.dim, "mixture source");
      std::normal_distribution<double> normal;
      std::bernoulli_distribution first(spec.weight);
      Eigen::VectorXd z(spec.dim);
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool c1 = first(rng);
        for (Eigen::Index j = 0; j < spec.dim; ++j) z[j] = normal(rng);
        out.row(i) = (c1 ? Eigen::VectorXd(spec.mean + L1 * z) : Eigen::VectorXd(spec.mean2 + L2 * z)).transpose();
      }
      return out;
    }
  }
  return out;
}

}  // namespace otmap
