#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "otmap/basis.hpp"

namespace otmap {

struct InvertOptions {
  double tol = 1e-10;          // target |S^d(x) - y_d|
  double max_bracket = 1e6;    // give up once the bracket leaves [-max_bracket, max_bracket]
  int max_iters = 200;         // per coordinate
};

// S(x) = W Phi(x) over a fixed multi-index set.  Immutable once built.
//
// Triangular structures require W(d, k) == 0 for k >= K_d; the constructor
// rejects weight matrices that break this.
class TransportMap {
 public:
  TransportMap(MultiIndexSet basis, Family family, Eigen::MatrixXd weights);

  static TransportMap identity(MultiIndexSet basis, Family family);

  Eigen::Index dim() const { return basis_.dim(); }
  Structure structure() const { return basis_.structure(); }
  Family family() const { return family_; }
  const MultiIndexSet& basis() const { return basis_; }
  const Eigen::MatrixXd& weights() const { return weights_; }

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Rows of `xs` are points.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& xs) const;

  // W J_Phi(x), D x D.
  Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // d-th output differentiated in the d-th input, for every d.
  Eigen::VectorXd diagonal_partials(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Dense: log det(W J_Phi(x)).  Triangular: sum_d log dS^d/dx_d.
  // Throws NonMonotoneAtPoint when the quantity is not positive.
  double log_det_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Coordinate-by-coordinate inverse; triangular structures only.
  Eigen::VectorXd invert(const Eigen::Ref<const Eigen::VectorXd>& y, const InvertOptions& opts = {}) const;
  Eigen::MatrixXd invert_batch(const Eigen::MatrixXd& ys, const InvertOptions& opts = {}) const;

  bool monotone_validated() const { return monotone_validated_; }
  void set_monotone_validated(bool v) { monotone_validated_ = v; }

 private:
  // Evaluates S^d with x_1..x_{d-1} fixed and x_d = t; also returns dS^d/dx_d.
  void eval_component(int d, const Eigen::VectorXd& prefix, double t, double& value, double& slope) const;

  MultiIndexSet basis_;
  Family family_;
  Eigen::MatrixXd weights_;
  bool monotone_validated_ = false;
};

struct MonotonicityViolation {
  Eigen::Index point_index;
  Eigen::VectorXd point;
  int coordinate;  // -1: determinant sign (dense maps)
  double value;    // offending partial or determinant
};

struct MonotonicityReport {
  bool ok = true;
  std::vector<MonotonicityViolation> violations;
};

MonotonicityReport check_monotonicity(const TransportMap& map, const Eigen::MatrixXd& points);

// Closest map (least squares over `points`) whose diagonal partials are at
// least `margin` at every supplied point.  Triangular maps only; the
// guarantee is pointwise, not global.
TransportMap project_monotone(const TransportMap& map, const Eigen::MatrixXd& points, double margin);

struct StageInfo {
  double theta = 0.0;
  double objective_train = 0.0;
  double objective_holdout = 0.0;
  int admm_iters = 0;
  bool converged = true;
};

// S_T o ... o S_1; stage 0 is applied first.
class SequentialMap {
 public:
  SequentialMap() = default;

  void push_back(TransportMap stage, StageInfo info = {});

  bool empty() const { return stages_.empty(); }
  std::size_t size() const { return stages_.size(); }
  Eigen::Index dim() const { return stages_.empty() ? 0 : stages_.front().dim(); }
  const std::vector<TransportMap>& stages() const { return stages_; }
  const std::vector<StageInfo>& info() const { return info_; }
  const TransportMap& stage(std::size_t t) const { return stages_[t]; }

 private:
  std::vector<TransportMap> stages_;
  std::vector<StageInfo> info_;
};

Eigen::MatrixXd compose_forward(const SequentialMap& seq, const Eigen::MatrixXd& xs);
Eigen::MatrixXd compose_inverse(const SequentialMap& seq, const Eigen::MatrixXd& ys, const InvertOptions& opts = {});

// Chain-rule log-determinant of the composition at every row of `xs`.
Eigen::VectorXd compose_log_det(const SequentialMap& seq, const Eigen::MatrixXd& xs);

}  // namespace otmap
