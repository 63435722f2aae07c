#include "otmap/composer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "otmap/admm_kr.hpp"

namespace otmap {

double ThetaSchedule::at(std::size_t stage) const { return theta0 * std::pow(ratio, static_cast<double>(stage)); }

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

double mean_neg_log_q(const Eigen::MatrixXd& pushed, const Eigen::VectorXd& log_det, const TargetDensity& target) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < pushed.rows(); ++i) s += -target.log_q(pushed.row(i).transpose()) - log_det[i];
  return s / static_cast<double>(pushed.rows());
}

// Pushes `cur` through `stage`, accumulating its log-determinant into `log_det`.
void advance(const TransportMap& stage, Eigen::MatrixXd& cur, Eigen::VectorXd& log_det) {
  for (Eigen::Index i = 0; i < cur.rows(); ++i) log_det[i] += stage.log_det_jacobian(cur.row(i).transpose());
  cur = stage.forward_batch(cur);
}

}  // namespace

double empirical_objective(const TransportMap& map, const Eigen::MatrixXd& samples, const TargetDensity& target) {
  if (samples.rows() == 0) throw InvalidArgument("empirical objective: no samples");
  Eigen::MatrixXd cur = samples;
  Eigen::VectorXd log_det = Eigen::VectorXd::Zero(samples.rows());
  advance(map, cur, log_det);
  return mean_neg_log_q(cur, log_det, target);
}

double empirical_objective(const SequentialMap& seq, const Eigen::MatrixXd& samples, const TargetDensity& target) {
  if (samples.rows() == 0) throw InvalidArgument("empirical objective: no samples");
  const Eigen::VectorXd log_det = compose_log_det(seq, samples);
  return mean_neg_log_q(compose_forward(seq, samples), log_det, target);
}

std::vector<double> kl_decay_check(const SequentialMap& seq, const Eigen::MatrixXd& samples,
                                   const TargetDensity& target) {
  if (samples.rows() == 0) throw InvalidArgument("kl decay check: no samples");
  std::vector<double> out;
  Eigen::MatrixXd cur = samples;
  Eigen::VectorXd log_det = Eigen::VectorXd::Zero(samples.rows());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    try {
      advance(seq.stage(t), cur, log_det);
    } catch (const NonMonotoneAtPoint& e) {
      throw NonMonotoneAtPoint("stage " + std::to_string(t + 1) + ": " + e.what(), e.point(), e.coordinate(),
                               static_cast<int>(t));
    }
    out.push_back(mean_neg_log_q(cur, log_det, target));
  }
  return out;
}

SequentialMap fit_sequential(const Eigen::MatrixXd& samples, const TargetDensity& target, const ComposerConfig& cfg) {
  if (cfg.stages < 1) throw InvalidArgument("sequential fit: need at least one stage");
  if (!is_triangular(cfg.basis.structure)) throw InvalidArgument("sequential fit: stages must be kr or krsv");
  if (!(cfg.holdout_fraction >= 0 && cfg.holdout_fraction < 1)) {
    throw InvalidArgument("sequential fit: holdout fraction must be in [0, 1)");
  }
  if (samples.rows() < 1) throw InvalidArgument("sequential fit: no samples");
  if (samples.cols() != target.dim()) {
    throw InvalidArgument("sequential fit: samples have dimension " + std::to_string(samples.cols()) +
                          ", target has " + std::to_string(target.dim()));
  }
  for (std::size_t t = 0; t < static_cast<std::size_t>(cfg.stages); ++t) {
    if (!(cfg.theta.at(t) >= 0) || !std::isfinite(cfg.theta.at(t))) {
      throw InvalidArgument("sequential fit: theta must be finite and >= 0 at every stage");
    }
  }

  const Eigen::Index N = samples.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto n_hold = static_cast<Eigen::Index>(std::floor(cfg.holdout_fraction * static_cast<double>(N)));
  if (N - n_hold < 1) n_hold = 0;
  if (n_hold > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Eigen::Index> hold_rows(order.begin(), order.begin() + n_hold);
  std::vector<Eigen::Index> train_rows(order.begin() + n_hold, order.end());
  std::sort(hold_rows.begin(), hold_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  Eigen::MatrixXd train = select_rows(samples, train_rows);
  Eigen::MatrixXd hold = select_rows(samples, hold_rows);
  Eigen::VectorXd ld_train = Eigen::VectorXd::Zero(train.rows());
  Eigen::VectorXd ld_hold = Eigen::VectorXd::Zero(hold.rows());

  const MultiIndexSet set =
      build_multi_index_set(cfg.basis.structure, static_cast<int>(samples.cols()), cfg.basis.order, cfg.basis.term_cap);

  auto monitored = [&](double train_obj, double hold_obj) { return n_hold > 0 ? hold_obj : train_obj; };
  double previous = monitored(mean_neg_log_q(train, ld_train, target),
                              n_hold > 0 ? mean_neg_log_q(hold, ld_hold, target) : 0.0);
  int small_steps = 0;

  SequentialMap seq;
  for (std::size_t t = 0; t < static_cast<std::size_t>(cfg.stages); ++t) {
    const double theta = cfg.theta.at(t);
    StageInfo info;
    info.theta = theta;
    try {
      KrAdmm solver(train, target, set, cfg.basis.family, theta, cfg.solver);
      FitResult fit = solver.run();
      info.admm_iters = fit.diagnostics.iterations;
      info.converged = fit.diagnostics.converged;
      TransportMap stage = std::move(fit.map);

      Eigen::MatrixXd points(train.rows() + hold.rows(), train.cols());
      points << train, hold;
      if (!check_monotonicity(stage, points).ok) {
        if (!cfg.project_on_violation) {
          throw NonMonotoneAtPoint("fitted stage is not monotone at some training or holdout point",
                                   Eigen::VectorXd(), -1, static_cast<int>(t));
        }
        stage = project_monotone(stage, points, cfg.projection_margin);
      }
      stage.set_monotone_validated(true);

      advance(stage, train, ld_train);
      if (n_hold > 0) advance(stage, hold, ld_hold);
      info.objective_train = mean_neg_log_q(train, ld_train, target);
      info.objective_holdout = n_hold > 0 ? mean_neg_log_q(hold, ld_hold, target) : info.objective_train;
      seq.push_back(std::move(stage), info);
    } catch (const Error& e) {
      throw SequentialFitError("stage " + std::to_string(t + 1) + ": " + e.what(), seq, static_cast<int>(t));
    }
    if (cfg.on_stage) cfg.on_stage(t, info);

    const double current = monitored(info.objective_train, info.objective_holdout);
    small_steps = previous - current < cfg.stop_tol ? small_steps + 1 : 0;
    previous = current;
    if (cfg.early_stop && t >= 1 && small_steps >= cfg.stop_patience) break;
  }
  return seq;
}

}  // namespace otmap
