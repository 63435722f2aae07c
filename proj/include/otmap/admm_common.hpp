#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "otmap/basis.hpp"
#include "otmap/density.hpp"
#include "otmap/transport_map.hpp"

namespace otmap {

enum class ReductionMode {
  Sharded,  // one shard per worker, partial sums added in shard order
  Strict,   // fixed-size chunks independent of the worker count
};

std::string to_string(ReductionMode m);
ReductionMode parse_reduction_mode(std::string_view text);

struct SolverConfig {
  double rho = 1.0;
  int max_iters = 5000;
  double tol_primal = 1e-5;
  double tol_dual = 1e-5;

  // p-update (damped Newton on the Huber-smoothed prox objective)
  double newton_tol = 1e-10;
  int newton_max_iters = 100;
  double huber_width = 1e-6;

  // Starting weights; identity map when empty.
  std::optional<Eigen::MatrixXd> initial_weights;

  int workers = 0;  // 0: OTMAP_WORKERS, else the OpenMP default
  ReductionMode reduction = ReductionMode::Sharded;
  int strict_chunk = 64;

  std::uint64_t seed = 0;

  bool record_history = true;
  std::function<void(int iter, double objective, double primal, double dual)> on_iteration;

  void validate() const;
};

struct BasisSpec {
  Structure structure = Structure::Dense;
  int order = 1;
  Family family = Family::HermiteProbabilist;
  std::size_t term_cap = kDefaultTermCap;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double primal_res = 0.0;
  double dual_res = 0.0;
};

struct FitDiagnostics {
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;  // empirical objective of the returned weights
  double primal_res = 0.0;
  double dual_res = 0.0;
  long p_update_failures = 0;
  std::vector<IterationRecord> history;
};

struct FitResult {
  TransportMap map;
  FitDiagnostics diagnostics;
};

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

int resolve_workers(int requested);

// Contiguous sample ranges [begin, end).
struct ShardPlan {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
};

ShardPlan make_shards(Eigen::Index n, int workers, ReductionMode mode, int strict_chunk);

// Runs fn(shard_index, begin, end) for every shard on `workers` threads.
void for_each_shard(const ShardPlan& plan, int workers,
                    const std::function<void(std::size_t, Eigen::Index, Eigen::Index)>& fn);

// argmin_p -log q(p) + rho/2 |p - c|^2.  Uses target.prox when available,
// otherwise damped Newton on the smoothed model starting from `warm`.
// Returns false (and leaves `p` at the last iterate) when Newton stalls.
bool prox_log_density(const TargetDensity& target, const Eigen::VectorXd& c, double rho, const SolverConfig& cfg,
                      Eigen::VectorXd& p);

// Per-sample cached basis data shared by both solvers.
//   phi: K x N, jac: K x (N D) with column i*D + d = dPhi(x_i)/dx_d.
struct BasisCache {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd jac;
};

BasisCache tabulate_samples(const MultiIndexSet& set, Family family, const Eigen::MatrixXd& samples, int workers);

// RMS of a matrix's entries (0 for empty input).
double rms(const Eigen::Ref<const Eigen::MatrixXd>& m);

// State and update machinery shared by the dense and triangular solvers.
//
// Per-sample blocks are stored side by side:
//   W, alpha    D x (N K), block i = columns [i K, (i+1) K)
//   p, gamma    D x N
// Bphi = B Phi_i and Bjac = B J_i (D x (N D)) are caches refreshed whenever B
// changes.  Members are public so tests can set up arbitrary states.
class ConsensusAdmm {
 public:
  virtual ~ConsensusAdmm() = default;

  Eigen::Index num_samples() const { return N_; }
  Eigen::Index dim() const { return D_; }
  Eigen::Index num_terms() const { return K_; }
  const MultiIndexSet& basis() const { return set_; }
  Family family() const { return family_; }
  const SolverConfig& config() const { return cfg_; }
  const BasisCache& cache() const { return cache_; }
  const TargetDensity& target() const { return target_; }
  int workers() const { return workers_; }
  long p_update_failures() const { return p_failures_; }

  Eigen::MatrixXd B, B_prev;
  Eigen::MatrixXd W, alpha;
  Eigen::MatrixXd p, gamma;
  Eigen::MatrixXd Bphi, Bjac;

  // Recomputes Bphi and Bjac from B.
  void refresh_cache();

  // W_i = B - alpha_i / rho.
  void update_W();
  // p_i = argmin -log q(p) + gamma_i^T (p - B Phi_i) + rho/2 |p - B Phi_i|^2.
  void update_p();

  virtual void update_B() = 0;
  // One full sweep of block updates followed by the multiplier ascent.
  virtual void step() = 0;
  virtual Residuals residuals() const = 0;
  // Objective the solver minimizes, evaluated at `weights` on the training samples.
  virtual double objective(const Eigen::MatrixXd& weights) const = 0;

  // (1/N) sum_i [-log q(S(x_i)) - log det J_S(x_i)]; +inf when some sample
  // has a non-positive Jacobian determinant / diagonal partial.
  double kl_objective(const Eigen::MatrixXd& weights) const;

  FitResult run();

 protected:
  ConsensusAdmm(const Eigen::MatrixXd& samples, const TargetDensity& target, MultiIndexSet set, Family family,
                SolverConfig cfg);

  // Initial weights: cfg.initial_weights or the identity map.
  Eigen::MatrixXd initial_weights() const;

  // Sums per-shard contributions in shard order.
  Eigen::MatrixXd reduce(Eigen::Index rows, Eigen::Index cols,
                         const std::function<void(Eigen::Index, Eigen::Index, Eigen::MatrixXd&)>& partial) const;
  // Partial sum over [b, e) of rho W_i + alpha_i.
  void accumulate_w_alpha(Eigen::Index b, Eigen::Index e, Eigen::MatrixXd& acc) const;

  void parallel(const std::function<void(Eigen::Index, Eigen::Index)>& fn) const;

  const TargetDensity& target_;
  MultiIndexSet set_;
  Family family_;
  SolverConfig cfg_;
  Eigen::Index N_, D_, K_;
  int workers_;
  ShardPlan plan_;
  BasisCache cache_;
  long p_failures_ = 0;
};

}  // namespace otmap
