#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace otmap {

// Value, gradient and Hessian of a (possibly smoothed) log density.
struct SecondOrderModel {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Unnormalized log density log q on R^D.
//
// Implementations are immutable after construction and every method is
// reentrant; the solvers call them concurrently from several workers.
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double log_q(const Eigen::VectorXd& u) const = 0;
  virtual Eigen::VectorXd grad_log_q(const Eigen::VectorXd& u) const = 0;

  // log q with every |.| replaced by a Huber function of width `huber_width`,
  // together with its gradient and Hessian.  Smooth densities ignore the width.
  virtual SecondOrderModel smoothed(const Eigen::VectorXd& u, double huber_width) const = 0;

  // argmin_p  -log q(p) + rho/2 |p - c|^2, when it has a closed form.
  virtual std::optional<Eigen::VectorXd> prox(const Eigen::VectorXd& c, double rho) const {
    (void)c;
    (void)rho;
    return std::nullopt;
  }

  // The solvers trust this flag; convexity of the fit depends on it.
  virtual bool log_concave() const { return true; }
};

class GaussianTarget final : public TargetDensity {
 public:
  GaussianTarget(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance);

  Eigen::Index dim() const override { return mean_.size(); }
  double log_q(const Eigen::VectorXd& u) const override;
  Eigen::VectorXd grad_log_q(const Eigen::VectorXd& u) const override;
  SecondOrderModel smoothed(const Eigen::VectorXd& u, double huber_width) const override;
  std::optional<Eigen::VectorXd> prox(const Eigen::VectorXd& c, double rho) const override;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
};

// Product of D independent Laplace(0, 1/rate) densities, normalizing constant kept.
class LaplacePrior final : public TargetDensity {
 public:
  LaplacePrior(double rate, Eigen::Index dim);

  Eigen::Index dim() const override { return dim_; }
  double log_q(const Eigen::VectorXd& u) const override;
  Eigen::VectorXd grad_log_q(const Eigen::VectorXd& u) const override;
  SecondOrderModel smoothed(const Eigen::VectorXd& u, double huber_width) const override;

  double rate() const { return rate_; }

 private:
  double rate_;
  Eigen::Index dim_;
};

// log f(y | x) = -|y - A x|^2 / (2 sigma^2), viewed as a function of x.
class GaussianLinearLikelihood final : public TargetDensity {
 public:
  GaussianLinearLikelihood(Eigen::VectorXd y, Eigen::MatrixXd design, double noise_variance);

  Eigen::Index dim() const override { return design_.cols(); }
  double log_q(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad_log_q(const Eigen::VectorXd& x) const override;
  SecondOrderModel smoothed(const Eigen::VectorXd& x, double huber_width) const override;

  const Eigen::VectorXd& response() const { return y_; }
  const Eigen::MatrixXd& design() const { return design_; }
  double noise_variance() const { return sigma2_; }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd design_;
  double sigma2_;
  Eigen::MatrixXd gram_;  // A^T A / sigma^2
};

// log q(x) = log f(y | x) + log f(x); the evidence term is dropped.
class BayesPosterior final : public TargetDensity {
 public:
  BayesPosterior(std::shared_ptr<const TargetDensity> prior, std::shared_ptr<const TargetDensity> likelihood);

  Eigen::Index dim() const override { return prior_->dim(); }
  double log_q(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd grad_log_q(const Eigen::VectorXd& x) const override;
  SecondOrderModel smoothed(const Eigen::VectorXd& x, double huber_width) const override;
  bool log_concave() const override { return prior_->log_concave() && likelihood_->log_concave(); }

  const TargetDensity& prior() const { return *prior_; }
  const TargetDensity& likelihood() const { return *likelihood_; }

 private:
  std::shared_ptr<const TargetDensity> prior_;
  std::shared_ptr<const TargetDensity> likelihood_;
};

// Density defined by user callbacks.  Without a Hessian callback the Newton
// model falls back to central differences of the gradient.
class CustomTarget final : public TargetDensity {
 public:
  using LogFn = std::function<double(const Eigen::VectorXd&)>;
  using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using HessFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  CustomTarget(Eigen::Index dim, LogFn log_q, GradFn grad, HessFn hess = {}, bool log_concave = true);

  Eigen::Index dim() const override { return dim_; }
  double log_q(const Eigen::VectorXd& u) const override { return log_q_(u); }
  Eigen::VectorXd grad_log_q(const Eigen::VectorXd& u) const override { return grad_(u); }
  SecondOrderModel smoothed(const Eigen::VectorXd& u, double huber_width) const override;
  bool log_concave() const override { return log_concave_; }

 private:
  Eigen::Index dim_;
  LogFn log_q_;
  GradFn grad_;
  HessFn hess_;
  bool log_concave_;
};

GaussianTarget gaussian_target(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance);
GaussianTarget standard_gaussian_target(Eigen::Index dim);
LaplacePrior laplace_prior(double rate, Eigen::Index dim);
BayesPosterior bayes_lasso_posterior(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, double rate,
                                     double noise_variance);

// Huber approximation of |t|: quadratic inside [-width, width].
double huber(double t, double width);
double huber_derivative(double t, double width);
double huber_second_derivative(double t, double width);

}  // namespace otmap
