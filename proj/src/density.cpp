#include "otmap/density.hpp"

#include <cmath>

#include "otmap/errors.hpp"

namespace otmap {

double huber(double t, double width) {
  const double a = std::abs(t);
  return a <= width ? 0.5 * t * t / width : a - 0.5 * width;
}

double huber_derivative(double t, double width) {
  if (std::abs(t) <= width) return t / width;
  return t > 0 ? 1.0 : -1.0;
}

double huber_second_derivative(double t, double width) { return std::abs(t) <= width ? 1.0 / width : 0.0; }

namespace {

double sign_or_zero(double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

void require_dim(const char* who, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw InvalidArgument(std::string(who) + ": expected dimension " + std::to_string(expected) + ", got " +
                          std::to_string(got));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian

GaussianTarget::GaussianTarget(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance) : mean_(std::move(mean)) {
  if (mean_.size() < 1) throw InvalidArgument("gaussian target: empty mean");
  if (covariance.rows() != mean_.size() || covariance.cols() != mean_.size()) {
    throw InvalidArgument("gaussian target: covariance must be " + std::to_string(mean_.size()) + "x" +
                          std::to_string(mean_.size()));
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw InvalidArgument("gaussian target: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw InvalidArgument("gaussian target: covariance is not positive definite");
  precision_ = llt.solve(Eigen::MatrixXd::Identity(mean_.size(), mean_.size()));
  precision_ = 0.5 * (precision_ + precision_.transpose());
}

double GaussianTarget::log_q(const Eigen::VectorXd& u) const {
  require_dim("gaussian log_q", dim(), u.size());
  const Eigen::VectorXd r = u - mean_;
  return -0.5 * r.dot(precision_ * r);
}

Eigen::VectorXd GaussianTarget::grad_log_q(const Eigen::VectorXd& u) const {
  require_dim("gaussian grad", dim(), u.size());
  return -precision_ * (u - mean_);
}

SecondOrderModel GaussianTarget::smoothed(const Eigen::VectorXd& u, double) const {
  return {log_q(u), grad_log_q(u), -precision_};
}

std::optional<Eigen::VectorXd> GaussianTarget::prox(const Eigen::VectorXd& c, double rho) const {
  // Stationarity: P (p - mu) + rho (p - c) = 0.
  const Eigen::MatrixXd lhs = precision_ + rho * Eigen::MatrixXd::Identity(dim(), dim());
  const Eigen::VectorXd rhs = precision_ * mean_ + rho * c;
  return Eigen::VectorXd(lhs.llt().solve(rhs));
}

// ---------------------------------------------------------------------------
// Laplace

LaplacePrior::LaplacePrior(double rate, Eigen::Index dim) : rate_(rate), dim_(dim) {
  if (!(rate > 0) || !std::isfinite(rate)) throw InvalidArgument("laplace prior: rate must be > 0");
  if (dim < 1) throw InvalidArgument("laplace prior: dimension must be >= 1");
}

double LaplacePrior::log_q(const Eigen::VectorXd& u) const {
  require_dim("laplace log_q", dim_, u.size());
  return static_cast<double>(dim_) * std::log(rate_ / 2.0) - rate_ * u.lpNorm<1>();
}

Eigen::VectorXd LaplacePrior::grad_log_q(const Eigen::VectorXd& u) const {
  require_dim("laplace grad", dim_, u.size());
  return u.unaryExpr([this](double t) { return -rate_ * sign_or_zero(t); });
}

SecondOrderModel LaplacePrior::smoothed(const Eigen::VectorXd& u, double w) const {
  require_dim("laplace model", dim_, u.size());
  SecondOrderModel m;
  m.value = static_cast<double>(dim_) * std::log(rate_ / 2.0);
  m.grad.resize(dim_);
  m.hess = Eigen::MatrixXd::Zero(dim_, dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    m.value -= rate_ * huber(u[i], w);
    m.grad[i] = -rate_ * huber_derivative(u[i], w);
    m.hess(i, i) = -rate_ * huber_second_derivative(u[i], w);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Linear-Gaussian likelihood

GaussianLinearLikelihood::GaussianLinearLikelihood(Eigen::VectorXd y, Eigen::MatrixXd design, double noise_variance)
    : y_(std::move(y)), design_(std::move(design)), sigma2_(noise_variance) {
  if (design_.rows() != y_.size()) {
    throw InvalidArgument("linear likelihood: design has " + std::to_string(design_.rows()) +
                          " rows but response has " + std::to_string(y_.size()) + " entries");
  }
  if (design_.cols() < 1) throw InvalidArgument("linear likelihood: design has no columns");
  if (!(noise_variance > 0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument("linear likelihood: noise variance must be > 0");
  }
  gram_ = design_.transpose() * design_ / sigma2_;
}

double GaussianLinearLikelihood::log_q(const Eigen::VectorXd& x) const {
  require_dim("likelihood log_q", dim(), x.size());
  return -(y_ - design_ * x).squaredNorm() / (2.0 * sigma2_);
}

Eigen::VectorXd GaussianLinearLikelihood::grad_log_q(const Eigen::VectorXd& x) const {
  require_dim("likelihood grad", dim(), x.size());
  return design_.transpose() * (y_ - design_ * x) / sigma2_;
}

SecondOrderModel GaussianLinearLikelihood::smoothed(const Eigen::VectorXd& x, double) const {
  return {log_q(x), grad_log_q(x), -gram_};
}

// ---------------------------------------------------------------------------
// Posterior

BayesPosterior::BayesPosterior(std::shared_ptr<const TargetDensity> prior,
                               std::shared_ptr<const TargetDensity> likelihood)
    : prior_(std::move(prior)), likelihood_(std::move(likelihood)) {
  if (!prior_ || !likelihood_) throw InvalidArgument("posterior: prior and likelihood are required");
  if (prior_->dim() != likelihood_->dim()) {
    throw InvalidArgument("posterior: prior dimension " + std::to_string(prior_->dim()) +
                          " does not match likelihood dimension " + std::to_string(likelihood_->dim()));
  }
}

double BayesPosterior::log_q(const Eigen::VectorXd& x) const { return likelihood_->log_q(x) + prior_->log_q(x); }

Eigen::VectorXd BayesPosterior::grad_log_q(const Eigen::VectorXd& x) const {
  return likelihood_->grad_log_q(x) + prior_->grad_log_q(x);
}

SecondOrderModel BayesPosterior::smoothed(const Eigen::VectorXd& x, double w) const {
  auto a = likelihood_->smoothed(x, w);
  const auto b = prior_->smoothed(x, w);
  a.value += b.value;
  a.grad += b.grad;
  a.hess += b.hess;
  return a;
}

// ---------------------------------------------------------------------------
// Custom

CustomTarget::CustomTarget(Eigen::Index dim, LogFn log_q, GradFn grad, HessFn hess, bool log_concave)
    : dim_(dim), log_q_(std::move(log_q)), grad_(std::move(grad)), hess_(std::move(hess)), log_concave_(log_concave) {
  if (dim < 1) throw InvalidArgument("custom target: dimension must be >= 1");
  if (!log_q_ || !grad_) throw InvalidArgument("custom target: log_q and gradient callbacks are required");
}

SecondOrderModel CustomTarget::smoothed(const Eigen::VectorXd& u, double) const {
  SecondOrderModel m{log_q_(u), grad_(u), {}};
  if (hess_) {
    m.hess = hess_(u);
    return m;
  }
  m.hess.resize(dim_, dim_);
  for (Eigen::Index j = 0; j < dim_; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(u[j]));
    Eigen::VectorXd up = u, dn = u;
    up[j] += h;
    dn[j] -= h;
    m.hess.col(j) = (grad_(up) - grad_(dn)) / (2 * h);
  }
  m.hess = 0.5 * (m.hess + m.hess.transpose()).eval();
  return m;
}

// ---------------------------------------------------------------------------

GaussianTarget gaussian_target(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance) {
  return GaussianTarget(mean, covariance);
}

GaussianTarget standard_gaussian_target(Eigen::Index dim) {
  return GaussianTarget(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

LaplacePrior laplace_prior(double rate, Eigen::Index dim) { return LaplacePrior(rate, dim); }

BayesPosterior bayes_lasso_posterior(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, double rate,
                                     double noise_variance) {
  auto likelihood = std::make_shared<GaussianLinearLikelihood>(y, design, noise_variance);
  auto prior = std::make_shared<LaplacePrior>(rate, design.cols());
  return BayesPosterior(std::move(prior), std::move(likelihood));
}

}  // namespace otmap
