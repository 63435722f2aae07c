#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "otmap/errors.hpp"
#include "otmap/transport_map.hpp"

namespace otmap {

namespace {

// min 1/2 (w - w0)^T H (w - w0)  s.t.  A w >= b with H SPD.  Dual active-set
// method of Goldfarb and Idnani: start from the unconstrained minimizer w0 and
// add the most violated constraint until none is violated.  The active normals
// stay linearly independent, which keeps the small systems well posed even
// when many points give nearly parallel constraints.
Eigen::VectorXd dual_active_set_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& w0, const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& b) {
  const Eigen::Index n = w0.size();
  const Eigen::Index m = A.rows();
  const Eigen::LLT<Eigen::MatrixXd> hllt(H);
  const Eigen::VectorXd row_norms = A.rowwise().norm();
  std::vector<Eigen::Index> active;
  std::vector<double> u;
  Eigen::VectorXd w = w0;
  const int max_iters = static_cast<int>(10 * (m + n) + 100);

  auto violation_tol = [&](Eigen::Index r) { return 1e-12 * (1.0 + row_norms[r] * w.norm()); };

  int it = 0;
  while (true) {
    // Most violated constraint, relative to its normal.
    const Eigen::VectorXd slack = A * w - b;
    Eigen::Index p = -1;
    double worst = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (slack[r] >= -violation_tol(r) || row_norms[r] == 0.0) continue;
      const double scaled = slack[r] / row_norms[r];
      if (scaled < worst) {
        worst = scaled;
        p = r;
      }
    }
    if (p < 0) return w;
    double u_p = 0.0;

    // Step towards satisfying constraint p, dropping blocking active ones.
    while (true) {
      if (++it > max_iters) throw InfeasibleProjection("monotone projection: active-set solver did not terminate");
      const Eigen::VectorXd np = A.row(p).transpose();
      const Eigen::VectorXd hn = hllt.solve(np);
      Eigen::VectorXd z = hn, r;
      const auto q = static_cast<Eigen::Index>(active.size());
      if (q > 0) {
        Eigen::MatrixXd N(n, q);
        for (Eigen::Index j = 0; j < q; ++j) N.col(j) = A.row(active[static_cast<std::size_t>(j)]).transpose();
        const Eigen::MatrixXd HN = hllt.solve(N);
        r = (N.transpose() * HN).ldlt().solve(N.transpose() * hn);
        z -= HN * r;
      }

      // Largest dual step keeping active multipliers non-negative.
      double t1 = std::numeric_limits<double>::infinity();
      Eigen::Index drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r[j] > 0) {
          const double t = u[static_cast<std::size_t>(j)] / r[j];
          if (t < t1) {
            t1 = t;
            drop = j;
          }
        }
      }
      // Primal step that makes constraint p active.
      const double zn = z.dot(np);
      const bool z_zero = z.norm() <= 1e-14 * std::max(1.0, hn.norm());
      const double t2 = z_zero || zn <= 0 ? std::numeric_limits<double>::infinity() : -(np.dot(w) - b[p]) / zn;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) throw InfeasibleProjection("monotone projection: constraints are inconsistent");

      if (!z_zero && std::isfinite(t2)) w += t * z;
      for (Eigen::Index j = 0; j < q; ++j) u[static_cast<std::size_t>(j)] -= t * r[j];
      u_p += t;
      if (t == t2) {
        active.push_back(p);
        u.push_back(u_p);
        break;
      }
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }
}

}  // namespace

TransportMap project_monotone(const TransportMap& map, const Eigen::MatrixXd& points, double margin) {
  if (!is_triangular(map.structure())) {
    throw UnsupportedOperation("monotone projection is only defined for triangular (kr/krsv) maps");
  }
  if (!(margin >= 0) || !std::isfinite(margin)) throw InvalidArgument("monotone projection: margin must be >= 0");
  if (points.cols() != map.dim()) {
    throw InvalidArgument("monotone projection: points have " + std::to_string(points.cols()) +
                          " columns, map dimension is " + std::to_string(map.dim()));
  }
  if (points.rows() == 0) return map;

  const MultiIndexSet& set = map.basis();
  const Eigen::Index K = set.size();
  const Eigen::Index P = points.rows();
  const int D = static_cast<int>(map.dim());

  Eigen::MatrixXd phi(K, P);
  std::vector<Eigen::MatrixXd> partials(static_cast<std::size_t>(D), Eigen::MatrixXd(P, K));
  {
    Eigen::VectorXd f(K);
    Eigen::MatrixXd jac(K, D);
    for (Eigen::Index p = 0; p < P; ++p) {
      eval_basis_and_jacobian(set, map.family(), points.row(p).transpose(), f, jac);
      phi.col(p) = f;
      for (int d = 0; d < D; ++d) partials[static_cast<std::size_t>(d)].row(p) = jac.col(d).transpose();
    }
  }
  const Eigen::MatrixXd gram = phi * phi.transpose();

  Eigen::MatrixXd W = map.weights();
  for (int d = 0; d < D; ++d) {
    const Eigen::Index Kd = set.row_size(d);
    const Eigen::MatrixXd A = partials[static_cast<std::size_t>(d)].leftCols(Kd);
    const Eigen::VectorXd w0 = W.row(d).head(Kd).transpose();
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(P, margin);
    if (((A * w0).array() >= margin).all()) continue;

    Eigen::MatrixXd H = gram.topLeftCorner(Kd, Kd);
    const double ridge = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
    H.diagonal().array() += ridge;

    const Eigen::VectorXd w = dual_active_set_qp(H, w0, A, b);
    W.row(d).head(Kd) = w.transpose();
  }
  return TransportMap(set, map.family(), W);
}

}  // namespace otmap
