#pragma once

#include <map>

#include <Eigen/Cholesky>

#include "otmap/admm_common.hpp"

namespace otmap {

// Consensus ADMM for one triangular stage of the transport-cost-regularized
// problem
//   min theta/N sum_i |B Phi_i - x_i|^2 + (1/N) sum_i [-log q(B Phi_i) - sum_d log (B Phi_i^d)_d]
// with per-sample copies p_i = B Phi_i, W_i = B, Y_i^d = B Phi_i^d and
// scalars Z_i^d = (Y_i^d)_d > 0.
//
//   Zd, beta    D x N, entry (d, i)
//   Y, lambda   D x (N D), column i D + d holds the vector for (i, d)
//
// Row d of B is restricted to its first K_d entries; update_B solves the
// B-block exactly over that subspace.  The target must outlive the solver.
class KrAdmm final : public ConsensusAdmm {
 public:
  KrAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set, Family family, double theta,
         SolverConfig cfg = {});

  double theta() const { return theta_; }

  Eigen::MatrixXd Zd, beta;
  Eigen::MatrixXd Y, lambda;

  void update_B() override;
  // Minimizer of the B-block with the triangular restriction lifted.
  Eigen::MatrixXd solve_B_unconstrained() const;
  void update_Zd();
  void update_Y();
  void update_multipliers();

  void step() override;
  Residuals residuals() const override;
  double objective(const Eigen::MatrixXd& weights) const override;

  void initialize(const Eigen::MatrixXd& weights);

  const Eigen::MatrixXd& system_matrix() const { return L_; }
  // Right-hand side M of the B stationarity condition B L = M.
  Eigen::MatrixXd rhs() const;

 private:
  double theta_;
  Eigen::MatrixXd X_;  // samples, D x N
  Eigen::MatrixXd L_;
  std::map<Eigen::Index, Eigen::LLT<Eigen::MatrixXd>> block_factors_;  // leading K_d x K_d blocks
};

FitResult fit_kr_stage(const Eigen::MatrixXd& samples, const TargetDensity& target, const BasisSpec& basis,
                       double theta, const SolverConfig& cfg = {});

// Positive root of rho z^2 + (beta - rho y) z - 1 = 0.
double positive_root_zd(double y, double beta, double rho);

}  // namespace otmap
