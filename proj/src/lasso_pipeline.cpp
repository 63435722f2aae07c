#include "otmap/lasso_pipeline.hpp"

#include "otmap/admm_dense.hpp"
#include "otmap/density.hpp"
#include "otmap/errors.hpp"
#include "otmap/sampling.hpp"

namespace otmap {

double lasso_auto_rho(const RegressionDataset& data, double sigma2) {
  return data.X.colwise().squaredNorm().sum() / (static_cast<double>(data.d()) * sigma2);
}

LassoTransportResult bayes_lasso_transport(const RegressionDataset& data, double lambda, double sigma2,
                                           const LassoTransportConfig& cfg) {
  if (!(lambda > 0)) throw InvalidArgument("lasso: lambda must be > 0");
  if (!(sigma2 > 0)) throw InvalidArgument("lasso: sigma2 must be > 0");
  if (cfg.n_prior < 1) throw InvalidArgument("lasso: need at least one prior sample");
  const BayesPosterior posterior = bayes_lasso_posterior(data.y, data.X, lambda, sigma2);

  SolverConfig solver = cfg.solver;
  if (cfg.auto_rho) solver.rho = lasso_auto_rho(data, sigma2);

  LassoTransportResult out;
  out.prior_samples = sample_source(SourceSpec::laplace(lambda, data.d()), cfg.n_prior, cfg.seed);
  if (cfg.basis.structure == Structure::Dense) {
    FitResult fit = fit_dense(out.prior_samples, posterior, cfg.basis, solver);
    out.samples = fit.map.forward_batch(out.prior_samples);
    out.converged = fit.diagnostics.converged;
    out.diagnostics = std::move(fit.diagnostics);
    out.map = std::move(fit.map);
  } else {
    ComposerConfig seq_cfg = cfg.sequential;
    seq_cfg.basis = cfg.basis;
    seq_cfg.solver = solver;
    SequentialMap seq = fit_sequential(out.prior_samples, posterior, seq_cfg);
    out.samples = compose_forward(seq, out.prior_samples);
    for (const auto& info : seq.info()) out.converged = out.converged && info.converged;
    out.sequence = std::move(seq);
  }
  return out;
}

}  // namespace otmap
