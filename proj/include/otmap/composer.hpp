#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "otmap/admm_common.hpp"
#include "otmap/errors.hpp"
#include "otmap/transport_map.hpp"

namespace otmap {

// theta_t = theta0 * ratio^t for stage t = 0, 1, ...
struct ThetaSchedule {
  double theta0 = 1.0;
  double ratio = 1.0;
  double at(std::size_t stage) const;
};

struct ComposerConfig {
  int stages = 10;
  ThetaSchedule theta;
  BasisSpec basis{Structure::KRSV, 2, Family::HermiteProbabilist, kDefaultTermCap};
  SolverConfig solver;

  double holdout_fraction = 0.2;
  double stop_tol = 1e-4;  // improvement of the monitored objective
  int stop_patience = 2;   // consecutive small improvements before stopping
  bool early_stop = true;

  // A stage that is not monotone at some training/holdout point is replaced by
  // its monotone projection on those points; otherwise the fit aborts.
  bool project_on_violation = true;
  double projection_margin = 1e-3;

  std::uint64_t seed = 0;  // holdout split
  std::function<void(std::size_t stage, const StageInfo& info)> on_stage;
};

// Thrown when a stage cannot be fitted; carries the stages completed so far.
class SequentialFitError : public Error {
 public:
  SequentialFitError(const std::string& what, SequentialMap partial, int stage)
      : Error(what), partial_(std::move(partial)), stage_(stage) {}
  const SequentialMap& partial() const { return partial_; }
  int stage() const { return stage_; }

 private:
  SequentialMap partial_;
  int stage_;
};

SequentialMap fit_sequential(const Eigen::MatrixXd& samples, const TargetDensity& target, const ComposerConfig& cfg);

// (1/N) sum_i [-log q(S(x_i)) - log det J_S(x_i)]; rows of `samples` are points.
double empirical_objective(const TransportMap& map, const Eigen::MatrixXd& samples, const TargetDensity& target);
double empirical_objective(const SequentialMap& seq, const Eigen::MatrixXd& samples, const TargetDensity& target);

// Objective of S_t o ... o S_1 for t = 1..T.
std::vector<double> kl_decay_check(const SequentialMap& seq, const Eigen::MatrixXd& samples,
                                   const TargetDensity& target);

}  // namespace otmap
