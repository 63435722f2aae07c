#include <doctest.h>

#include <cmath>
#include <memory>

#include <Eigen/QR>

#include "oracles.hpp"
#include "otmap/density.hpp"
#include "otmap/errors.hpp"

using namespace otmap;

namespace {

struct Named {
  std::string name;
  std::shared_ptr<TargetDensity> q;
  bool has_kinks;
};

std::vector<Named> builtin_targets(oracle::Gen& g) {
  std::vector<Named> out;
  out.push_back({"standard gaussian", std::make_shared<GaussianTarget>(standard_gaussian_target(3)), false});
  out.push_back({"correlated gaussian", std::make_shared<GaussianTarget>(gaussian_target(g.normal_vector(3), g.spd(3))),
                 false});
  out.push_back({"laplace", std::make_shared<LaplacePrior>(laplace_prior(1.7, 3)), true});
  const Eigen::MatrixXd A = g.normal_matrix(12, 3);
  const Eigen::VectorXd y = g.normal_vector(12);
  out.push_back({"lasso posterior", std::make_shared<BayesPosterior>(bayes_lasso_posterior(y, A, 0.8, 1.3)), true});
  return out;
}

}  // namespace

TEST_CASE("gaussian target values") {
  const auto q = standard_gaussian_target(2);
  CHECK(q.log_q(Eigen::Vector2d::Zero()) == 0.0);
  CHECK(q.grad_log_q(Eigen::Vector2d::Zero()).norm() == 0.0);
  CHECK(q.log_q(Eigen::Vector2d(1, 0)) == doctest::Approx(-0.5));
  CHECK(q.grad_log_q(Eigen::Vector2d(1, 0)).isApprox(Eigen::Vector2d(-1, 0)));
  const auto q4 = gaussian_target(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 4.0));
  CHECK(q4.grad_log_q(Eigen::VectorXd::Constant(1, 2.0))[0] == doctest::Approx(-0.5));
}

TEST_CASE("gaussian target rejects a covariance that is not positive definite") {
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(gaussian_target(Eigen::Vector2d::Zero(), bad), InvalidArgument);
  CHECK_THROWS_AS(gaussian_target(Eigen::Vector2d::Zero(), Eigen::Matrix3d::Identity()), InvalidArgument);
}

TEST_CASE("laplace prior values") {
  CHECK(laplace_prior(2.0, 1).log_q(Eigen::VectorXd::Zero(1)) == doctest::Approx(0.0));
  CHECK(laplace_prior(1.0, 2).log_q(Eigen::Vector2d(1, -1)) == doctest::Approx(2 * std::log(0.5) - 2));
  CHECK(laplace_prior(1.0, 1).grad_log_q(Eigen::VectorXd::Constant(1, 3.0))[0] == -1.0);
  CHECK(laplace_prior(1.0, 1).grad_log_q(Eigen::VectorXd::Zero(1))[0] == 0.0);
  CHECK_THROWS_AS(laplace_prior(0.0, 2), InvalidArgument);
  CHECK_THROWS_AS(laplace_prior(-1.0, 2), InvalidArgument);
}

TEST_CASE("lasso posterior values") {
  const auto q = bayes_lasso_posterior(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1), 1.0, 1.0);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(q.log_q(x) == doctest::Approx(-2.0 - 2.0 + std::log(0.5)));
  CHECK(q.grad_log_q(x)[0] == doctest::Approx(-3.0));

  oracle::Gen g(4);
  const Eigen::MatrixXd A = g.normal_matrix(20, 3);
  const Eigen::VectorXd y = g.normal_vector(20);
  const Eigen::VectorXd ls = A.colPivHouseholderQr().solve(y);
  const GaussianLinearLikelihood lik(y, A, 0.7);
  CHECK(lik.grad_log_q(ls).norm() < 1e-10);
  CHECK_THROWS_AS(bayes_lasso_posterior(y, g.normal_matrix(19, 3), 1.0, 1.0), InvalidArgument);
}

TEST_CASE("posterior equals prior term plus likelihood term") {
  oracle::Gen g(21);
  const Eigen::MatrixXd A = g.normal_matrix(15, 4);
  const Eigen::VectorXd y = g.normal_vector(15);
  const double lambda = 1.3, s2 = 0.6;
  const auto q = bayes_lasso_posterior(y, A, lambda, s2);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd x = g.normal_vector(4, 2.0);
    const double lik = -(y - A * x).squaredNorm() / (2 * s2);
    const double prior = 4 * std::log(lambda / 2) - lambda * x.cwiseAbs().sum();
    CHECK(std::abs(q.log_q(x) - (lik + prior)) < 1e-12 * std::max(1.0, std::abs(lik + prior)));
  }
}

TEST_CASE("built-in gradients match central differences away from kinks") {
  oracle::Gen g(99);
  for (const auto& t : builtin_targets(g)) {
    CAPTURE(t.name);
    int tested = 0;
    while (tested < 100) {
      const Eigen::VectorXd u = g.normal_vector(3, 2.0);
      if (t.has_kinks && u.cwiseAbs().minCoeff() < 1e-3) continue;
      const Eigen::VectorXd fd = oracle::fd_gradient([&](const Eigen::VectorXd& v) { return t.q->log_q(v); }, u, 1e-5);
      CHECK(oracle::rel_err(t.q->grad_log_q(u), fd) < 1e-6);
      ++tested;
    }
  }
}

TEST_CASE("built-in targets satisfy the concavity inequality") {
  oracle::Gen g(123);
  for (const auto& t : builtin_targets(g)) {
    CAPTURE(t.name);
    CHECK(t.q->log_concave());
    for (int pair = 0; pair < 100; ++pair) {
      const Eigen::VectorXd u = g.normal_vector(3, 3.0), v = g.normal_vector(3, 3.0);
      for (double s : {0.25, 0.5, 0.75}) {
        CHECK(t.q->log_q(s * u + (1 - s) * v) >= s * t.q->log_q(u) + (1 - s) * t.q->log_q(v) - 1e-9);
      }
    }
  }
}

TEST_CASE("smoothed model: gradient and hessian are consistent with its value") {
  oracle::Gen g(8);
  const double w = 0.05;  // wide enough to test the quadratic piece with differences
  for (const auto& t : builtin_targets(g)) {
    CAPTURE(t.name);
    for (int k = 0; k < 30; ++k) {
      const Eigen::VectorXd u = g.normal_vector(3, k < 10 ? 0.02 : 2.0);
      const SecondOrderModel m = t.q->smoothed(u, w);
      // Skip points within differencing distance of the Huber breakpoints.
      if (t.has_kinks && ((u.cwiseAbs().array() - w).abs() < 1e-3).any()) continue;
      auto value = [&](const Eigen::VectorXd& v) { return t.q->smoothed(v, w).value; };
      CHECK(oracle::rel_err(m.grad, oracle::fd_gradient(value, u, 1e-5)) < 1e-6);
      for (int j = 0; j < 3; ++j) {
        auto gj = [&](const Eigen::VectorXd& v) { return t.q->smoothed(v, w).grad[j]; };
        CHECK(oracle::rel_err(m.hess.row(j).transpose(), oracle::fd_gradient(gj, u, 1e-5)) < 1e-6);
      }
      if (!t.has_kinks) CHECK(m.value == doctest::Approx(t.q->log_q(u)));
    }
  }
}

TEST_CASE("gaussian prox solves its stationarity condition") {
  oracle::Gen g(2);
  const auto q = gaussian_target(g.normal_vector(3), g.spd(3));
  const Eigen::VectorXd c = g.normal_vector(3);
  const double rho = 1.7;
  const Eigen::VectorXd p = *q.prox(c, rho);
  CHECK((-q.grad_log_q(p) + rho * (p - c)).norm() < 1e-10);
  CHECK_FALSE(laplace_prior(1.0, 2).prox(Eigen::Vector2d::Zero(), 1.0).has_value());
}

TEST_CASE("custom target falls back to a differenced hessian") {
  CustomTarget q(
      2, [](const Eigen::VectorXd& u) { return -std::log(std::cosh(u[0])) - 0.5 * u.squaredNorm(); },
      [](const Eigen::VectorXd& u) {
        Eigen::VectorXd g = -u;
        g[0] -= std::tanh(u[0]);
        return g;
      });
  const Eigen::Vector2d u(0.4, -1.0);
  const SecondOrderModel m = q.smoothed(u, 1e-6);
  const double sech2 = 1.0 / (std::cosh(0.4) * std::cosh(0.4));
  CHECK(m.hess(0, 0) == doctest::Approx(-1 - sech2).epsilon(1e-8));
  CHECK(m.hess(1, 1) == doctest::Approx(-1).epsilon(1e-8));
  CHECK(std::abs(m.hess(0, 1)) < 1e-8);
}
