#include "otmap/transport_map.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "otmap/errors.hpp"

namespace otmap {

namespace {

std::string describe(const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(x[i]);
  }
  return s + ")";
}

void require_point(const TransportMap& map, const Eigen::Ref<const Eigen::VectorXd>& x, const char* who) {
  if (x.size() != map.dim()) {
    throw InvalidArgument(std::string(who) + ": point has dimension " + std::to_string(x.size()) + ", map has " +
                          std::to_string(map.dim()));
  }
  if (!x.allFinite()) throw NonFiniteInput(std::string(who) + ": non-finite input " + describe(x));
}

}  // namespace

TransportMap::TransportMap(MultiIndexSet basis, Family family, Eigen::MatrixXd weights)
    : basis_(std::move(basis)), family_(family), weights_(std::move(weights)) {
  if (weights_.rows() != basis_.dim() || weights_.cols() != basis_.size()) {
    throw InvalidArgument("transport map: weights must be " + std::to_string(basis_.dim()) + "x" +
                          std::to_string(basis_.size()) + ", got " + std::to_string(weights_.rows()) + "x" +
                          std::to_string(weights_.cols()));
  }
  if (!weights_.allFinite()) throw NonFiniteInput("transport map: non-finite weights");
  if (is_triangular(basis_.structure())) {
    for (int d = 0; d < basis_.dim(); ++d) {
      const Eigen::Index Kd = basis_.row_size(d);
      for (Eigen::Index k = Kd; k < basis_.size(); ++k) {
        if (weights_(d, k) != 0.0) {
          throw InvalidArgument("transport map: row " + std::to_string(d) + " has a non-zero weight at column " +
                                std::to_string(k) + ", beyond its triangular block of " + std::to_string(Kd) +
                                " terms");
        }
      }
    }
  }
}

TransportMap TransportMap::identity(MultiIndexSet basis, Family family) {
  if (basis.order() < 1) throw InvalidArgument("identity map needs basis order >= 1");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(basis.dim(), basis.size());
  // psi_1(x) = x for both supported families.
  for (int d = 0; d < basis.dim(); ++d) w(d, basis.linear_term(d)) = 1.0;
  return TransportMap(std::move(basis), family, std::move(w));
}

Eigen::VectorXd TransportMap::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_point(*this, x, "forward");
  return weights_ * eval_basis(basis_, family_, x);
}

Eigen::MatrixXd TransportMap::forward_batch(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != dim()) {
    throw InvalidArgument("forward: batch has " + std::to_string(xs.cols()) + " columns, map dimension is " +
                          std::to_string(dim()));
  }
  Eigen::MatrixXd out(xs.rows(), xs.cols());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) out.row(i) = forward(xs.row(i).transpose()).transpose();
  return out;
}

Eigen::MatrixXd TransportMap::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_point(*this, x, "jacobian");
  return weights_ * eval_basis_jacobian(basis_, family_, x);
}

Eigen::VectorXd TransportMap::diagonal_partials(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require_point(*this, x, "diagonal partials");
  const Eigen::MatrixXd jac = eval_basis_jacobian(basis_, family_, x);
  Eigen::VectorXd out(dim());
  for (int d = 0; d < dim(); ++d) out[d] = weights_.row(d).dot(jac.col(d));
  return out;
}

double TransportMap::log_det_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (is_triangular(structure())) {
    const Eigen::VectorXd partials = diagonal_partials(x);
    double s = 0.0;
    for (int d = 0; d < dim(); ++d) {
      if (!(partials[d] > 0.0)) {
        throw NonMonotoneAtPoint("map is not monotone at " + describe(x) + ": dS^" + std::to_string(d + 1) +
                                     "/dx_" + std::to_string(d + 1) + " = " + std::to_string(partials[d]),
                                 x, d);
      }
      s += std::log(partials[d]);
    }
    return s;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(x));
  const auto& m = lu.matrixLU();
  double sign = lu.permutationP().determinant();
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double u = m(i, i);
    if (u < 0) sign = -sign;
    s += std::log(std::abs(u));
  }
  if (!(sign > 0) || !std::isfinite(s)) {
    throw NonMonotoneAtPoint("map Jacobian determinant is not positive at " + describe(x), x, -1);
  }
  return s;
}

void TransportMap::eval_component(int d, const Eigen::VectorXd& x, double t, double& value, double& slope) const {
  const int O = basis_.order();
  // Only the prefix x_0..x_d matters for row d; x(d) is replaced by t.
  thread_local std::vector<double> vals, ders;
  vals.assign(static_cast<std::size_t>((d + 1) * (O + 1)), 0.0);
  ders.assign(vals.size(), 0.0);
  for (int a = 0; a <= d; ++a) {
    univariate_values(family_, a == d ? t : x[a], O, &vals[static_cast<std::size_t>(a * (O + 1))],
                      &ders[static_cast<std::size_t>(a * (O + 1))]);
  }
  value = 0.0;
  slope = 0.0;
  const Eigen::Index Kd = basis_.row_size(d);
  for (Eigen::Index k = 0; k < Kd; ++k) {
    const double w = weights_(d, k);
    if (w == 0.0) continue;
    double v = 1.0, g = 0.0;
    bool has_d = false;
    double rest = 1.0;
    for (const auto& f : basis_.factors(k)) {
      const auto idx = static_cast<std::size_t>(f.coord * (O + 1) + f.exponent);
      v *= vals[idx];
      if (f.coord == d) {
        has_d = true;
        g = ders[idx];
      } else {
        rest *= vals[idx];
      }
    }
    value += w * v;
    if (has_d) slope += w * g * rest;
  }
}

Eigen::VectorXd TransportMap::invert(const Eigen::Ref<const Eigen::VectorXd>& y, const InvertOptions& opts) const {
  if (!is_triangular(structure())) {
    throw UnsupportedOperation("inversion is only supported for triangular (kr/krsv) maps");
  }
  require_point(*this, y, "invert");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  for (int d = 0; d < dim(); ++d) {
    const double target = y[d];
    auto residual = [&](double t, double& slope) {
      double v;
      eval_component(d, x, t, v, slope);
      return v - target;
    };

    double t0 = target, s0;
    double f0 = residual(t0, s0);
    if (std::abs(f0) <= opts.tol) {
      x[d] = t0;
      continue;
    }
    // Expand a bracket in the direction a monotone increasing component needs.
    const double dir = f0 < 0 ? 1.0 : -1.0;
    double step = (s0 > 0 && std::isfinite(s0)) ? std::abs(f0) / s0 : 1.0;
    step = std::max(step, 1e-8 * std::max(1.0, std::abs(t0)));
    double t1 = t0 + dir * step, s1;
    double f1 = residual(t1, s1);
    while ((f1 < 0) == (f0 < 0) && f1 != 0.0) {
      t0 = t1;
      f0 = f1;
      step *= 2.0;
      t1 = t0 + dir * step;
      if (std::abs(t1) > opts.max_bracket) {
        throw BracketNotFound("invert: no sign change for coordinate " + std::to_string(d + 1) + " within |x| <= " +
                              std::to_string(opts.max_bracket) + " (target " + std::to_string(target) + ")");
      }
      f1 = residual(t1, s1);
    }
    if (f1 == 0.0) {
      x[d] = t1;
      continue;
    }
    double lo = f0 < 0 ? t0 : t1;
    double hi = f0 < 0 ? t1 : t0;
    double t = 0.5 * (lo + hi);
    bool done = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      double slope;
      const double f = residual(t, slope);
      if (std::abs(f) <= opts.tol) {
        done = true;
        break;
      }
      if (f < 0) lo = t;
      else hi = t;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        done = true;
        break;
      }
      double next = (slope > 0 && std::isfinite(slope)) ? t - f / slope : lo - 1.0;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    if (!done) {
      throw NoConvergence("invert: coordinate " + std::to_string(d + 1) + " did not converge in " +
                          std::to_string(opts.max_iters) + " iterations");
    }
    x[d] = t;
  }
  return x;
}

Eigen::MatrixXd TransportMap::invert_batch(const Eigen::MatrixXd& ys, const InvertOptions& opts) const {
  if (ys.cols() != dim()) {
    throw InvalidArgument("invert: batch has " + std::to_string(ys.cols()) + " columns, map dimension is " +
                          std::to_string(dim()));
  }
  Eigen::MatrixXd out(ys.rows(), ys.cols());
  for (Eigen::Index i = 0; i < ys.rows(); ++i) out.row(i) = invert(ys.row(i).transpose(), opts).transpose();
  return out;
}

MonotonicityReport check_monotonicity(const TransportMap& map, const Eigen::MatrixXd& points) {
  MonotonicityReport report;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd x = points.row(i).transpose();
    if (is_triangular(map.structure())) {
      const Eigen::VectorXd partials = map.diagonal_partials(x);
      for (int d = 0; d < map.dim(); ++d) {
        if (!(partials[d] > 0.0)) report.violations.push_back({i, x, d, partials[d]});
      }
    } else {
      const double det = map.jacobian(x).determinant();
      if (!(det > 0.0)) report.violations.push_back({i, x, -1, det});
    }
  }
  report.ok = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------

void SequentialMap::push_back(TransportMap stage, StageInfo info) {
  if (!stages_.empty() && stage.dim() != dim()) {
    throw InvalidArgument("sequential map: stage dimension " + std::to_string(stage.dim()) +
                          " does not match " + std::to_string(dim()));
  }
  stages_.push_back(std::move(stage));
  info_.push_back(info);
}

namespace {

[[noreturn]] void rethrow_with_stage(std::size_t t) {
  const std::string prefix = "stage " + std::to_string(t + 1) + ": ";
  try {
    throw;
  } catch (const NonMonotoneAtPoint& e) {
    throw NonMonotoneAtPoint(prefix + e.what(), e.point(), e.coordinate(), static_cast<int>(t));
  } catch (const BracketNotFound& e) {
    throw BracketNotFound(prefix + e.what());
  } catch (const NoConvergence& e) {
    throw NoConvergence(prefix + e.what());
  } catch (const UnsupportedOperation& e) {
    throw UnsupportedOperation(prefix + e.what());
  } catch (const NonFiniteInput& e) {
    throw NonFiniteInput(prefix + e.what());
  }
}

}  // namespace

Eigen::MatrixXd compose_forward(const SequentialMap& seq, const Eigen::MatrixXd& xs) {
  if (seq.empty()) throw InvalidArgument("compose_forward: sequence has no stages");
  Eigen::MatrixXd cur = xs;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    try {
      cur = seq.stage(t).forward_batch(cur);
    } catch (const Error&) {
      rethrow_with_stage(t);
    }
  }
  return cur;
}

Eigen::MatrixXd compose_inverse(const SequentialMap& seq, const Eigen::MatrixXd& ys, const InvertOptions& opts) {
  if (seq.empty()) throw InvalidArgument("compose_inverse: sequence has no stages");
  Eigen::MatrixXd cur = ys;
  for (std::size_t t = seq.size(); t-- > 0;) {
    try {
      cur = seq.stage(t).invert_batch(cur, opts);
    } catch (const Error&) {
      rethrow_with_stage(t);
    }
  }
  return cur;
}

Eigen::VectorXd compose_log_det(const SequentialMap& seq, const Eigen::MatrixXd& xs) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(xs.rows());
  Eigen::MatrixXd cur = xs;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    try {
      for (Eigen::Index i = 0; i < cur.rows(); ++i) total[i] += seq.stage(t).log_det_jacobian(cur.row(i).transpose());
      cur = seq.stage(t).forward_batch(cur);
    } catch (const Error&) {
      rethrow_with_stage(t);
    }
  }
  return total;
}

}  // namespace otmap
