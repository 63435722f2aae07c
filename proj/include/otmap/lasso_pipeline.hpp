#pragma once

#include <cstdint>
#include <optional>

#include "otmap/admm_common.hpp"
#include "otmap/composer.hpp"
#include "otmap/regression.hpp"

namespace otmap {

struct LassoTransportConfig {
  Eigen::Index n_prior = 2000;
  BasisSpec basis{Structure::Dense, 4, Family::HermiteProbabilist, kDefaultTermCap};
  SolverConfig solver;
  // Replace solver.rho by the mean curvature of the likelihood,
  // trace(A^T A) / (d sigma2); a unit penalty is far too weak against a
  // posterior this concentrated.
  bool auto_rho = true;
  // Used instead of a single dense fit when basis.structure is kr/krsv.
  ComposerConfig sequential;
  std::uint64_t seed = 0;  // prior draws
};

struct LassoTransportResult {
  Eigen::MatrixXd prior_samples;
  Eigen::MatrixXd samples;  // prior samples pushed through the fitted map
  std::optional<TransportMap> map;
  std::optional<SequentialMap> sequence;
  FitDiagnostics diagnostics;  // single-map fits only
  bool converged = true;
};

double lasso_auto_rho(const RegressionDataset& data, double sigma2);

// Fits a map from the Laplace(lambda) prior to the Bayesian LASSO posterior
// of the (standardized) dataset and pushes the prior draws through it.
LassoTransportResult bayes_lasso_transport(const RegressionDataset& data, double lambda, double sigma2,
                                           const LassoTransportConfig& cfg = {});

}  // namespace otmap
