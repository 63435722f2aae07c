#include "otmap/admm_common.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>

#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "otmap/errors.hpp"

namespace otmap {

std::string to_string(ReductionMode m) { return m == ReductionMode::Strict ? "strict" : "sharded"; }

ReductionMode parse_reduction_mode(std::string_view text) {
  if (text == "sharded") return ReductionMode::Sharded;
  if (text == "strict") return ReductionMode::Strict;
  throw InvalidArgument("unknown reduction mode '" + std::string(text) + "' (expected sharded|strict)");
}

void SolverConfig::validate() const {
  if (!(rho > 0) || !std::isfinite(rho)) throw InvalidArgument("solver: rho must be > 0");
  if (max_iters < 1) throw InvalidArgument("solver: max_iters must be >= 1");
  if (!(tol_primal > 0) || !(tol_dual > 0)) throw InvalidArgument("solver: tolerances must be > 0");
  if (!(newton_tol > 0) || newton_max_iters < 1) throw InvalidArgument("solver: invalid Newton settings");
  if (!(huber_width > 0)) throw InvalidArgument("solver: huber width must be > 0");
  if (workers < 0) throw InvalidArgument("solver: workers must be >= 0");
  if (strict_chunk < 1) throw InvalidArgument("solver: strict chunk must be >= 1");
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OTMAP_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, omp_get_max_threads());
}

ShardPlan make_shards(Eigen::Index n, int workers, ReductionMode mode, int strict_chunk) {
  ShardPlan plan;
  if (n <= 0) return plan;
  if (mode == ReductionMode::Strict) {
    for (Eigen::Index b = 0; b < n; b += strict_chunk) plan.ranges.emplace_back(b, std::min(n, b + strict_chunk));
    return plan;
  }
  const Eigen::Index shards = std::min<Eigen::Index>(std::max(1, workers), n);
  for (Eigen::Index s = 0; s < shards; ++s) plan.ranges.emplace_back(n * s / shards, n * (s + 1) / shards);
  return plan;
}

void for_each_shard(const ShardPlan& plan, int workers,
                    const std::function<void(std::size_t, Eigen::Index, Eigen::Index)>& fn) {
  const auto count = static_cast<long>(plan.ranges.size());
  if (workers <= 1 || count <= 1) {
    for (long s = 0; s < count; ++s) fn(static_cast<std::size_t>(s), plan.ranges[s].first, plan.ranges[s].second);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long s = 0; s < count; ++s) {
    try {
      fn(static_cast<std::size_t>(s), plan.ranges[static_cast<std::size_t>(s)].first,
         plan.ranges[static_cast<std::size_t>(s)].second);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

bool prox_log_density(const TargetDensity& target, const Eigen::VectorXd& c, double rho, const SolverConfig& cfg,
                      Eigen::VectorXd& p) {
  if (auto closed = target.prox(c, rho)) {
    p = std::move(*closed);
    return true;
  }
  const Eigen::Index D = c.size();
  if (p.size() != D || !p.allFinite()) p = c;
  auto objective = [&](const Eigen::VectorXd& u, SecondOrderModel& m) {
    m = target.smoothed(u, cfg.huber_width);
    return -m.value + 0.5 * rho * (u - c).squaredNorm();
  };

  SecondOrderModel m;
  double f = objective(p, m);
  for (int it = 0; it < cfg.newton_max_iters; ++it) {
    const Eigen::VectorXd g = -m.grad + rho * (p - c);
    const double scale = std::max(1.0, m.grad.norm() + rho * (p - c).norm());
    if (g.norm() <= cfg.newton_tol * scale) return true;

    Eigen::MatrixXd H = -m.hess;
    H.diagonal().array() += rho;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    double shift = 0.0;
    while (llt.info() != Eigen::Success) {
      // Only reachable for targets whose log-concavity flag is wrong.
      shift = shift == 0.0 ? rho : 10.0 * shift;
      H.diagonal().array() += shift;
      llt.compute(H);
      if (shift > 1e12) return false;
    }
    const Eigen::VectorXd step = -llt.solve(g);
    const double slope = g.dot(step);
    double t = 1.0;
    SecondOrderModel trial_model;
    bool accepted = false;
    while (t > 1e-12) {
      const Eigen::VectorXd trial = p + t * step;
      const double ft = objective(trial, trial_model);
      // Near the optimum f stops resolving the decrease; fall back to the gradient norm.
      const bool flat = std::abs(ft - f) <= 1e-12 * std::max(1.0, std::abs(f));
      if (std::isfinite(ft) &&
          (ft <= f + 1e-4 * t * slope ||
           (flat && (-trial_model.grad + rho * (trial - c)).norm() < g.norm()))) {
        p = trial;
        f = ft;
        m = std::move(trial_model);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable decrease left; accept if the gradient is at round-off level.
      return g.norm() <= 1e-6 * scale;
    }
  }
  const Eigen::VectorXd g = -m.grad + rho * (p - c);
  return g.norm() <= cfg.newton_tol * std::max(1.0, m.grad.norm() + rho * (p - c).norm());
}

BasisCache tabulate_samples(const MultiIndexSet& set, Family family, const Eigen::MatrixXd& samples, int workers) {
  if (samples.cols() != set.dim()) {
    throw InvalidArgument("samples have " + std::to_string(samples.cols()) + " columns, basis dimension is " +
                          std::to_string(set.dim()));
  }
  if (!samples.allFinite()) throw NonFiniteInput("samples contain non-finite values");
  const Eigen::Index N = samples.rows();
  const Eigen::Index D = set.dim();
  BasisCache cache;
  cache.phi.resize(set.size(), N);
  cache.jac.resize(set.size(), N * D);
  const ShardPlan plan = make_shards(N, workers, ReductionMode::Sharded, 1);
  for_each_shard(plan, workers, [&](std::size_t, Eigen::Index b, Eigen::Index e) {
    for (Eigen::Index i = b; i < e; ++i) {
      eval_basis_and_jacobian(set, family, samples.row(i).transpose(), cache.phi.col(i), cache.jac.middleCols(i * D, D));
    }
  });
  return cache;
}

double rms(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

// ---------------------------------------------------------------------------

ConsensusAdmm::ConsensusAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set,
                             Family family, SolverConfig cfg)
    : target_(target), set_(std::move(set)), family_(family), cfg_(std::move(cfg)) {
  cfg_.validate();
  N_ = samples.rows();
  D_ = set_.dim();
  K_ = set_.size();
  if (N_ < 1) throw InvalidArgument("solver: need at least one sample");
  if (target_.dim() != D_) {
    throw InvalidArgument("solver: target dimension " + std::to_string(target_.dim()) +
                          " does not match sample dimension " + std::to_string(D_));
  }
  workers_ = resolve_workers(cfg_.workers);
  plan_ = make_shards(N_, workers_, cfg_.reduction, cfg_.strict_chunk);
  cache_ = tabulate_samples(set_, family_, samples, workers_);
}

Eigen::MatrixXd ConsensusAdmm::initial_weights() const {
  if (cfg_.initial_weights) {
    const Eigen::MatrixXd& w0 = *cfg_.initial_weights;
    if (w0.rows() != D_ || w0.cols() != K_) {
      throw InvalidArgument("solver: initial weights must be " + std::to_string(D_) + "x" + std::to_string(K_));
    }
    return TransportMap(set_, family_, w0).weights();  // validates structural zeros
  }
  return TransportMap::identity(set_, family_).weights();
}

void ConsensusAdmm::parallel(const std::function<void(Eigen::Index, Eigen::Index)>& fn) const {
  for_each_shard(plan_, workers_, [&](std::size_t, Eigen::Index b, Eigen::Index e) { fn(b, e); });
}

Eigen::MatrixXd ConsensusAdmm::reduce(
    Eigen::Index rows, Eigen::Index cols,
    const std::function<void(Eigen::Index, Eigen::Index, Eigen::MatrixXd&)>& partial) const {
  std::vector<Eigen::MatrixXd> parts(plan_.ranges.size());
  for_each_shard(plan_, workers_, [&](std::size_t s, Eigen::Index b, Eigen::Index e) {
    parts[s] = Eigen::MatrixXd::Zero(rows, cols);
    partial(b, e, parts[s]);
  });
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& part : parts) total += part;
  return total;
}

void ConsensusAdmm::accumulate_w_alpha(Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) const {
  const double rho = cfg_.rho;
  for (Eigen::Index i = b; i < e; ++i) acc += rho * W.middleCols(i * K_, K_) + alpha.middleCols(i * K_, K_);
}

void ConsensusAdmm::refresh_cache() {
  Bphi.resize(D_, N_);
  Bjac.resize(D_, N_ * D_);
  parallel([&](Eigen::Index b, Eigen::Index e) {
    Bphi.middleCols(b, e - b).noalias() = B * cache_.phi.middleCols(b, e - b);
    Bjac.middleCols(b * D_, (e - b) * D_).noalias() = B * cache_.jac.middleCols(b * D_, (e - b) * D_);
  });
}

void ConsensusAdmm::update_W() {
  const double rho = cfg_.rho;
  parallel([&](Eigen::Index b, Eigen::Index e) {
    for (Eigen::Index i = b; i < e; ++i) W.middleCols(i * K_, K_) = B - alpha.middleCols(i * K_, K_) / rho;
  });
}

void ConsensusAdmm::update_p() {
  const double rho = cfg_.rho;
  std::vector<long> failures(plan_.ranges.size(), 0);
  for_each_shard(plan_, workers_, [&](std::size_t s, Eigen::Index b, Eigen::Index e) {
    Eigen::VectorXd pi;
    for (Eigen::Index i = b; i < e; ++i) {
      const Eigen::VectorXd c = Bphi.col(i) - gamma.col(i) / rho;
      pi = p.col(i);
      if (prox_log_density(target_, c, rho, cfg_, pi) && pi.allFinite()) {
        p.col(i) = pi;
      } else {
        ++failures[s];  // keep the previous iterate
      }
    }
  });
  for (long f : failures) p_failures_ += f;
}

double ConsensusAdmm::kl_objective(const Eigen::MatrixXd& weights) const {
  const bool triangular = is_triangular(set_.structure());
  const Eigen::MatrixXd total = reduce(1, 2, [&](Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) {
    Eigen::MatrixXd J(D_, D_);
    for (Eigen::Index i = b; i < e; ++i) {
      const Eigen::VectorXd u = weights * cache_.phi.col(i);
      J.noalias() = weights * cache_.jac.middleCols(i * D_, D_);
      double logdet = 0.0;
      bool ok = true;
      if (triangular) {
        for (Eigen::Index d = 0; d < D_; ++d) {
          if (!(J(d, d) > 0)) ok = false;
          else logdet += std::log(J(d, d));
        }
      } else {
        const double det = J.determinant();
        if (!(det > 0)) ok = false;
        else logdet = std::log(det);
      }
      if (!ok) {
        acc(0, 1) += 1;
        continue;
      }
      acc(0, 0) += -target_.log_q(u) - logdet;
    }
  });
  if (total(0, 1) > 0) return std::numeric_limits<double>::infinity();
  return total(0, 0) / static_cast<double>(N_);
}

FitResult ConsensusAdmm::run() {
  FitDiagnostics diag;
  Eigen::MatrixXd best = B;
  double best_score = std::numeric_limits<double>::infinity();
  Residuals best_res{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const bool want_objective = cfg_.record_history || static_cast<bool>(cfg_.on_iteration);

  for (int k = 1; k <= cfg_.max_iters; ++k) {
    step();
    const Residuals res = residuals();
    if (!std::isfinite(res.primal) || !std::isfinite(res.dual)) {
      throw NumericError("solver: residuals became non-finite at iteration " + std::to_string(k));
    }
    const double obj = want_objective ? objective(B) : std::numeric_limits<double>::quiet_NaN();
    if (cfg_.record_history) diag.history.push_back({k, obj, res.primal, res.dual});
    if (cfg_.on_iteration) cfg_.on_iteration(k, obj, res.primal, res.dual);
    diag.iterations = k;

    const double score = std::max(res.primal / cfg_.tol_primal, res.dual / cfg_.tol_dual);
    if (score < best_score) {
      best_score = score;
      best = B;
      best_res = res;
    }
    if (res.primal <= cfg_.tol_primal && res.dual <= cfg_.tol_dual) {
      diag.converged = true;
      break;
    }
  }
  diag.primal_res = best_res.primal;
  diag.dual_res = best_res.dual;
  diag.p_update_failures = p_failures_;
  diag.final_objective = kl_objective(best);
  return {TransportMap(set_, family_, best), std::move(diag)};
}

}  // namespace otmap
