#include "otmap/admm_kr.hpp"

#include <cmath>

#include "otmap/admm_dense.hpp"
#include "otmap/errors.hpp"

namespace otmap {

double positive_root_zd(double y, double beta, double rho) {
  // rho z - 1/z = rho y - beta.
  return positive_root_z(rho * y - beta, rho);
}

KrAdmm::KrAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set, Family family,
               double theta, SolverConfig cfg)
    : ConsensusAdmm(samples, target, std::move(set), family, std::move(cfg)), theta_(theta) {
  if (!is_triangular(set_.structure())) throw InvalidArgument("triangular solver needs a kr or krsv basis");
  if (!(theta >= 0) || !std::isfinite(theta)) throw InvalidArgument("triangular solver: theta must be >= 0");
  X_ = samples.transpose();
  const double rho = cfg_.rho;
  const Eigen::MatrixXd gram = reduce(K_, 2 * K_, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const auto phi = cache_.phi.middleCols(b, e - b);
    const auto jac = cache_.jac.middleCols(b * D_, (e - b) * D_);
    acc.leftCols(K_).noalias() += phi * phi.transpose();
    acc.rightCols(K_).noalias() += jac * jac.transpose();
  });
  const double n = static_cast<double>(N_);
  L_ = rho * Eigen::MatrixXd::Identity(K_, K_) + ((rho + 2.0 * theta_) / n) * gram.leftCols(K_) +
       (rho / n) * gram.rightCols(K_);
  for (int d = 0; d < D_; ++d) {
    const Eigen::Index Kd = set_.row_size(d);
    if (block_factors_.count(Kd)) continue;
    Eigen::LLT<Eigen::MatrixXd> llt(L_.topLeftCorner(Kd, Kd));
    if (llt.info() != Eigen::Success) throw DegenerateBasis("triangular solver: system matrix is not positive definite");
    block_factors_.emplace(Kd, std::move(llt));
  }
  initialize(initial_weights());
}

void KrAdmm::initialize(const Eigen::MatrixXd& weights) {
  B = weights;
  B_prev = B;
  refresh_cache();
  W = B.replicate(1, N_);
  alpha = Eigen::MatrixXd::Zero(D_, N_ * K_);
  p = Bphi;
  gamma = Eigen::MatrixXd::Zero(D_, N_);
  Y = Bjac;
  lambda = Eigen::MatrixXd::Zero(D_, N_ * D_);
  Zd.resize(D_, N_);
  for (Eigen::Index i = 0; i < N_; ++i) {
    for (Eigen::Index d = 0; d < D_; ++d) Zd(d, i) = std::max(Y(d, i * D_ + d), 1e-6);
  }
  beta = Eigen::MatrixXd::Zero(D_, N_);
}

Eigen::MatrixXd KrAdmm::rhs() const {
  const double rho = cfg_.rho;
  return reduce(D_, K_, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const Eigen::Index n = e - b;
    accumulate_w_alpha(b, e, acc);
    acc.noalias() += (rho * p.middleCols(b, n) + gamma.middleCols(b, n) + 2.0 * theta_ * X_.middleCols(b, n)) *
                     cache_.phi.middleCols(b, n).transpose();
    acc.noalias() += (rho * Y.middleCols(b * D_, n * D_) + lambda.middleCols(b * D_, n * D_)) *
                     cache_.jac.middleCols(b * D_, n * D_).transpose();
  }) / static_cast<double>(N_);
}

Eigen::MatrixXd KrAdmm::solve_B_unconstrained() const { return L_.llt().solve(rhs().transpose()).transpose(); }

void KrAdmm::update_B() {
  const Eigen::MatrixXd M = rhs();
  B_prev = B;
  B.setZero();
  for (int d = 0; d < D_; ++d) {
    const Eigen::Index Kd = set_.row_size(d);
    B.row(d).head(Kd) = block_factors_.at(Kd).solve(M.row(d).head(Kd).transpose()).transpose();
  }
  refresh_cache();
}

void KrAdmm::update_Zd() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    for (Eigen::Index i = b; i < e; ++i) {
      for (Eigen::Index d = 0; d < D_; ++d) Zd(d, i) = positive_root_zd(Y(d, i * D_ + d), beta(d, i), rho);
    }
  });
}

void KrAdmm::update_Y() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    const Eigen::Index n = e - b;
    Y.middleCols(b * D_, n * D_) = Bjac.middleCols(b * D_, n * D_) - lambda.middleCols(b * D_, n * D_) / rho;
    for (Eigen::Index i = b; i < e; ++i) {
      for (Eigen::Index d = 0; d < D_; ++d) {
        const Eigen::Index c = i * D_ + d;
        Y(d, c) = (rho * Zd(d, i) + rho * Bjac(d, c) + beta(d, i) - lambda(d, c)) / (2.0 * rho);
      }
    }
  });
}

void KrAdmm::update_multipliers() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    const Eigen::Index n = e - b;
    gamma.middleCols(b, n) += rho * (p.middleCols(b, n) - Bphi.middleCols(b, n));
    lambda.middleCols(b * D_, n * D_) += rho * (Y.middleCols(b * D_, n * D_) - Bjac.middleCols(b * D_, n * D_));
    for (Eigen::Index i = b; i < e; ++i) {
      alpha.middleCols(i * K_, K_) += rho * (W.middleCols(i * K_, K_) - B);
      for (Eigen::Index d = 0; d < D_; ++d) beta(d, i) += rho * (Zd(d, i) - Y(d, i * D_ + d));
    }
  });
}

void KrAdmm::step() {
  update_B();
  update_W();
  update_Zd();
  update_Y();
  update_p();
  update_multipliers();
}

Residuals KrAdmm::residuals() const {
  const Eigen::MatrixXd sq = reduce(1, 4, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const Eigen::Index n = e - b;
    acc(0, 0) += (p.middleCols(b, n) - Bphi.middleCols(b, n)).squaredNorm();
    acc(0, 1) += (Y.middleCols(b * D_, n * D_) - Bjac.middleCols(b * D_, n * D_)).squaredNorm();
    for (Eigen::Index i = b; i < e; ++i) {
      acc(0, 2) += (W.middleCols(i * K_, K_) - B).squaredNorm();
      for (Eigen::Index d = 0; d < D_; ++d) {
        const double r = Zd(d, i) - Y(d, i * D_ + d);
        acc(0, 3) += r * r;
      }
    }
  });
  const double n = static_cast<double>(N_);
  const double primal = std::sqrt(std::max(
      {sq(0, 0) / (n * D_), sq(0, 1) / (n * D_ * D_), sq(0, 2) / (n * D_ * K_), sq(0, 3) / (n * D_)}));
  return {primal, cfg_.rho * rms(B - B_prev)};
}

double KrAdmm::objective(const Eigen::MatrixXd& weights) const {
  const double kl = kl_objective(weights);
  if (theta_ == 0.0) return kl;
  const Eigen::MatrixXd cost = reduce(1, 1, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    acc(0, 0) += (weights * cache_.phi.middleCols(b, e - b) - X_.middleCols(b, e - b)).squaredNorm();
  });
  return kl + theta_ * cost(0, 0) / static_cast<double>(N_);
}

FitResult fit_kr_stage(const Eigen::MatrixXd& samples, const TargetDensity& target, const BasisSpec& basis,
                       double theta, const SolverConfig& cfg) {
  MultiIndexSet set =
      build_multi_index_set(basis.structure, static_cast<int>(samples.cols()), basis.order, basis.term_cap);
  KrAdmm solver(samples, target, std::move(set), basis.family, theta, cfg);
  return solver.run();
}

}  // namespace otmap
