#pragma once

// Augmented-Lagrangian block costs for both solvers, written out term by term
// from the per-sample basis values, plus random-state generators.  Shared by
// the solver unit tests and the acceptance run.

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "otmap/admm_dense.hpp"
#include "otmap/admm_kr.hpp"

namespace oracle {

struct Tab {
  std::vector<Eigen::VectorXd> phi;
  std::vector<Eigen::MatrixXd> jac;  // K x D, column d = dPhi/dx_d
};

inline Tab tabulate(const otmap::MultiIndexSet& set, otmap::Family f, const Eigen::MatrixXd& X) {
  Tab t;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    t.phi.push_back(basis_direct(set, f, X.row(i).transpose()));
    t.jac.push_back(otmap::eval_basis_jacobian(set, f, X.row(i).transpose()));
  }
  return t;
}

inline double frob_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

inline double min_eig(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

inline double log_det_spd(const Eigen::MatrixXd& Z) {
  Eigen::LLT<Eigen::MatrixXd> llt(Z);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Derivatives of f along the symmetric basis directions at Z.
inline Eigen::VectorXd sym_gradient(const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& Z) {
  const auto D = Z.rows();
  Eigen::VectorXd g(D * (D + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < D; ++a) {
    for (Eigen::Index b = a; b < D; ++b) {
      Eigen::MatrixXd E = Eigen::MatrixXd::Zero(D, D);
      E(a, b) = E(b, a) = 1.0;
      g[k++] = fd_derivative([&](double h) { return f(Z + h * E); }, 0.0, 1e-4);
    }
  }
  return g;
}

inline Eigen::MatrixXd structural_mask(const otmap::MultiIndexSet& set) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(set.dim(), set.size());
  for (Eigen::Index d = 0; d < set.dim(); ++d) {
    m.row(d).head(otmap::is_triangular(set.structure()) ? set.row_size(d) : set.size()).setOnes();
  }
  return m;
}

// Arbitrary (not necessarily consistent) states; Z_i SPD, Z_i^d > 0.
inline void randomize(otmap::DenseAdmm& s, Gen& g) {
  const auto N = s.num_samples(), D = s.dim(), K = s.num_terms();
  s.B = g.normal_matrix(D, K, 0.5);
  s.W = g.normal_matrix(D, N * K, 0.5);
  s.alpha = g.normal_matrix(D, N * K, 0.5);
  s.p = g.normal_matrix(D, N);
  s.gamma = g.normal_matrix(D, N, 0.5);
  for (Eigen::Index i = 0; i < N; ++i) s.Z.middleCols(i * D, D) = g.spd(D);
  s.lambda = g.normal_matrix(D, N * D, 0.5);
  s.refresh_cache();
}

inline void randomize(otmap::KrAdmm& s, Gen& g) {
  const auto N = s.num_samples(), D = s.dim(), K = s.num_terms();
  const Eigen::MatrixXd mask = structural_mask(s.basis());
  s.B = g.normal_matrix(D, K, 0.5).cwiseProduct(mask);
  s.W = g.normal_matrix(D, N * K, 0.5).cwiseProduct(mask.replicate(1, N));
  s.alpha = g.normal_matrix(D, N * K, 0.5).cwiseProduct(mask.replicate(1, N));
  s.p = g.normal_matrix(D, N);
  s.gamma = g.normal_matrix(D, N, 0.5);
  s.Y = g.normal_matrix(D, N * D);
  s.lambda = g.normal_matrix(D, N * D, 0.5);
  s.Zd = g.uniform_vector(D * N, 0.2, 2.0).reshaped(D, N);
  s.beta = g.normal_matrix(D, N, 0.5);
  s.refresh_cache();
}

// Terms of the dense augmented Lagrangian that involve B, averaged over samples.
inline double dense_b_cost(const otmap::DenseAdmm& s, const Tab& t, const Eigen::MatrixXd& B) {
  const double rho = s.config().rho;
  const auto N = s.num_samples(), D = s.dim(), K = s.num_terms();
  double c = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::VectorXd r1 = s.p.col(i) - B * t.phi[i];
    const Eigen::MatrixXd r2 = s.Z.middleCols(i * D, D) - B * t.jac[i];
    const Eigen::MatrixXd r3 = s.W.middleCols(i * K, K) - B;
    c += s.gamma.col(i).dot(r1) + 0.5 * rho * r1.squaredNorm();
    c += frob_dot(s.lambda.middleCols(i * D, D), r2) + 0.5 * rho * r2.squaredNorm();
    c += frob_dot(s.alpha.middleCols(i * K, K), r3) + 0.5 * rho * r3.squaredNorm();
  }
  return c / static_cast<double>(N);
}

inline double dense_z_cost(const otmap::DenseAdmm& s, const Tab& t, Eigen::Index i, const Eigen::MatrixXd& Z) {
  const double rho = s.config().rho;
  const auto D = s.dim();
  const Eigen::MatrixXd BJ = s.B * t.jac[i];
  return -log_det_spd(Z) + frob_dot(s.lambda.middleCols(i * D, D), Z - BJ) + 0.5 * rho * (Z - BJ).squaredNorm();
}

// Terms of the triangular augmented Lagrangian that involve B, averaged over samples.
inline double kr_b_cost(const otmap::KrAdmm& s, const Tab& t, const Eigen::MatrixXd& X, const Eigen::MatrixXd& B) {
  const double rho = s.config().rho, theta = s.theta();
  const auto N = s.num_samples(), D = s.dim(), K = s.num_terms();
  double c = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::VectorXd u = B * t.phi[i];
    c += theta * (u - X.row(i).transpose()).squaredNorm();
    const Eigen::VectorXd r1 = s.p.col(i) - u;
    c += s.gamma.col(i).dot(r1) + 0.5 * rho * r1.squaredNorm();
    const Eigen::MatrixXd r2 = s.Y.middleCols(i * D, D) - B * t.jac[i];
    c += frob_dot(s.lambda.middleCols(i * D, D), r2) + 0.5 * rho * r2.squaredNorm();
    const Eigen::MatrixXd r3 = s.W.middleCols(i * K, K) - B;
    c += frob_dot(s.alpha.middleCols(i * K, K), r3) + 0.5 * rho * r3.squaredNorm();
  }
  return c / static_cast<double>(N);
}

// Terms for the D x D block Y_i (column d is Y_i^d).
inline double kr_y_cost(const otmap::KrAdmm& s, const Tab& t, Eigen::Index i, const Eigen::MatrixXd& Yi) {
  const double rho = s.config().rho;
  const auto D = s.dim();
  const Eigen::MatrixXd r = Yi - s.B * t.jac[i];
  double c = frob_dot(s.lambda.middleCols(i * D, D), r) + 0.5 * rho * r.squaredNorm();
  for (Eigen::Index d = 0; d < D; ++d) {
    const double e = s.Zd(d, i) - Yi(d, d);
    c += s.beta(d, i) * e + 0.5 * rho * e * e;
  }
  return c;
}

inline double kr_zd_cost(const otmap::KrAdmm& s, Eigen::Index d, Eigen::Index i, double z) {
  const double rho = s.config().rho;
  const double y = s.Y(d, i * s.dim() + d), beta = s.beta(d, i);
  return -std::log(z) + beta * (z - y) + 0.5 * rho * (z - y) * (z - y);
}

// Shared by both solvers: W_i and p_i blocks.
inline double w_cost(const otmap::ConsensusAdmm& s, Eigen::Index i, const Eigen::MatrixXd& Wi) {
  const double rho = s.config().rho;
  const auto K = s.num_terms();
  return frob_dot(s.alpha.middleCols(i * K, K), Wi - s.B) + 0.5 * rho * (Wi - s.B).squaredNorm();
}

inline double p_cost(const otmap::ConsensusAdmm& s, const Tab& t, Eigen::Index i, const Eigen::VectorXd& pi) {
  const double rho = s.config().rho;
  const Eigen::VectorXd v = s.B * t.phi[i];
  return -s.target().log_q(pi) + s.gamma.col(i).dot(pi - v) + 0.5 * rho * (pi - v).squaredNorm();
}

}  // namespace oracle
