#include "otmap/admm_dense.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "otmap/errors.hpp"

namespace otmap {

double positive_root_z(double nu, double rho) {
  const double s = std::sqrt(nu * nu + 4.0 * rho);
  // Avoid cancellation for large negative nu: z+ z- = -1/rho.
  return nu >= 0 ? (nu + s) / (2.0 * rho) : 2.0 / (s - nu);
}

namespace {

Eigen::MatrixXd floor_spd(const Eigen::MatrixXd& m, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

DenseAdmm::DenseAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set, Family family,
                     SolverConfig cfg)
    : ConsensusAdmm(samples, target, std::move(set), family, std::move(cfg)) {
  const Eigen::MatrixXd gram = reduce(K_, K_, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const auto phi = cache_.phi.middleCols(b, e - b);
    const auto jac = cache_.jac.middleCols(b * D_, (e - b) * D_);
    acc.noalias() += phi * phi.transpose();
    acc.noalias() += jac * jac.transpose();
  });
  L_ = cfg_.rho * (Eigen::MatrixXd::Identity(K_, K_) + gram / static_cast<double>(N_));
  L_factor_.compute(L_);
  if (L_factor_.info() != Eigen::Success) throw DegenerateBasis("dense solver: system matrix is not positive definite");
  initialize(initial_weights());
}

void DenseAdmm::initialize(const Eigen::MatrixXd& weights) {
  B = weights;
  B_prev = B;
  refresh_cache();
  W = B.replicate(1, N_);
  alpha = Eigen::MatrixXd::Zero(D_, N_ * K_);
  p = Bphi;
  gamma = Eigen::MatrixXd::Zero(D_, N_);
  Z.resize(D_, N_ * D_);
  for (Eigen::Index i = 0; i < N_; ++i) Z.middleCols(i * D_, D_) = floor_spd(Bjac.middleCols(i * D_, D_), 1e-6);
  lambda = Eigen::MatrixXd::Zero(D_, N_ * D_);
}

void DenseAdmm::update_B() {
  const double rho = cfg_.rho;
  const Eigen::MatrixXd M = reduce(D_, K_, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const Eigen::Index n = e - b;
    accumulate_w_alpha(b, e, acc);
    acc.noalias() += (rho * p.middleCols(b, n) + gamma.middleCols(b, n)) * cache_.phi.middleCols(b, n).transpose();
    acc.noalias() += (rho * Z.middleCols(b * D_, n * D_) + lambda.middleCols(b * D_, n * D_)) *
                     cache_.jac.middleCols(b * D_, n * D_).transpose();
  }) / static_cast<double>(N_);
  B_prev = B;
  B = L_factor_.solve(M.transpose()).transpose();
  refresh_cache();
}

void DenseAdmm::update_Z() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(D_);
    for (Eigen::Index i = b; i < e; ++i) {
      const Eigen::MatrixXd m = rho * Bjac.middleCols(i * D_, D_) - lambda.middleCols(i * D_, D_);
      eig.compute(0.5 * (m + m.transpose()));
      if (eig.info() != Eigen::Success) {
        throw NumericError("dense solver: eigendecomposition failed for sample " + std::to_string(i));
      }
      Eigen::VectorXd z = eig.eigenvalues();
      for (Eigen::Index j = 0; j < D_; ++j) z[j] = positive_root_z(z[j], rho);
      Z.middleCols(i * D_, D_).noalias() = eig.eigenvectors() * z.asDiagonal() * eig.eigenvectors().transpose();
    }
  });
}

void DenseAdmm::update_multipliers() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    const Eigen::Index n = e - b;
    gamma.middleCols(b, n) += rho * (p.middleCols(b, n) - Bphi.middleCols(b, n));
    lambda.middleCols(b * D_, n * D_) += rho * (Z.middleCols(b * D_, n * D_) - Bjac.middleCols(b * D_, n * D_));
    for (Eigen::Index i = b; i < e; ++i) alpha.middleCols(i * K_, K_) += rho * (W.middleCols(i * K_, K_) - B);
  });
}

void DenseAdmm::step() {
  update_B();
  update_W();
  update_Z();
  update_p();
  update_multipliers();
}

Residuals DenseAdmm::residuals() const {
  const Eigen::MatrixXd sq = reduce(1, 3, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    const Eigen::Index n = e - b;
    acc(0, 0) += (p.middleCols(b, n) - Bphi.middleCols(b, n)).squaredNorm();
    acc(0, 1) += (Z.middleCols(b * D_, n * D_) - Bjac.middleCols(b * D_, n * D_)).squaredNorm();
    for (Eigen::Index i = b; i < e; ++i) acc(0, 2) += (W.middleCols(i * K_, K_) - B).squaredNorm();
  });
  const double n = static_cast<double>(N_);
  const double primal = std::sqrt(std::max({sq(0, 0) / (n * D_), sq(0, 1) / (n * D_ * D_), sq(0, 2) / (n * D_ * K_)}));
  return {primal, cfg_.rho * rms(B - B_prev)};
}

FitResult fit_dense(const Eigen::MatrixXd& samples, const TargetDensity& target, const BasisSpec& basis,
                    const SolverConfig& cfg) {
  if (basis.structure != Structure::Dense) throw InvalidArgument("fit_dense needs a dense basis");
  MultiIndexSet set = build_multi_index_set(Structure::Dense, static_cast<int>(samples.cols()), basis.order,
                                            basis.term_cap);
  DenseAdmm solver(samples, target, std::move(set), basis.family, cfg);
  return solver.run();
}

}  // namespace otmap
