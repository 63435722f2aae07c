#pragma once

#include <Eigen/Cholesky>

#include "otmap/admm_common.hpp"

namespace otmap {

// Consensus ADMM for min (1/N) sum_i [-log q(B Phi_i) - log det(B J_i)] with
// per-sample copies W_i = B, p_i = B Phi_i, Z_i = B J_i (Z_i SPD).
//
//   Z, lambda   D x (N D), block i = columns [i D, (i+1) D)
//
// The target must outlive the solver.
class DenseAdmm final : public ConsensusAdmm {
 public:
  DenseAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set, Family family,
            SolverConfig cfg = {});

  Eigen::MatrixXd Z, lambda;

  // B = M L^{-1} with L = rho (I + (1/N) sum_i (Phi_i Phi_i^T + J_i J_i^T)).
  void update_B() override;
  // Z_i = Q diag((nu + sqrt(nu^2 + 4 rho)) / (2 rho)) Q^T where
  // Q diag(nu) Q^T = sym(rho B J_i - lambda_i).
  void update_Z();
  void update_multipliers();

  void step() override;
  Residuals residuals() const override;
  double objective(const Eigen::MatrixXd& weights) const override { return kl_objective(weights); }

  // Sets B and every per-sample copy to be consistent with `weights`;
  // multipliers are zeroed and Z_i is B J_i symmetrized and floored to SPD.
  void initialize(const Eigen::MatrixXd& weights);

  const Eigen::MatrixXd& system_matrix() const { return L_; }

 private:
  Eigen::MatrixXd L_;
  Eigen::LLT<Eigen::MatrixXd> L_factor_;
};

FitResult fit_dense(const Eigen::MatrixXd& samples, const TargetDensity& target, const BasisSpec& basis,
                    const SolverConfig& cfg = {});

// Positive root of rho z - 1/z = nu.
double positive_root_z(double nu, double rho);

}  // namespace otmap
