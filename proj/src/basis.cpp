#include "otmap/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otmap/errors.hpp"

namespace otmap {

std::string to_string(Structure s) {
  switch (s) {
    case Structure::Dense: return "dense";
    case Structure::KR: return "kr";
    case Structure::KRSV: return "krsv";
  }
  return "?";
}

std::string to_string(Family f) {
  switch (f) {
    case Family::HermiteProbabilist: return "hermite";
    case Family::Monomial: return "monomial";
  }
  return "?";
}

Structure parse_structure(std::string_view text) {
  if (text == "dense") return Structure::Dense;
  if (text == "kr") return Structure::KR;
  if (text == "krsv") return Structure::KRSV;
  throw InvalidArgument("unknown structure '" + std::string(text) + "' (expected dense|kr|krsv)");
}

Family parse_family(std::string_view text) {
  if (text == "hermite") return Family::HermiteProbabilist;
  if (text == "monomial") return Family::Monomial;
  throw InvalidArgument("unknown basis family '" + std::string(text) + "' (expected hermite|monomial)");
}

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

// C(n + k, k) with saturation.
std::size_t binomial_saturating(std::size_t n_plus_k, std::size_t k) {
  k = std::min(k, n_plus_k - k);
  // Running product stays an exact integer: result * (n-k+i) / i.
  unsigned __int128 result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n_plus_k - k + i) / i;
    if (result > kSaturated) return kSaturated;
  }
  return static_cast<std::size_t>(result);
}

int block_of(const MultiIndexSet::Exponents& j) {
  for (int a = static_cast<int>(j.size()) - 1; a >= 0; --a) {
    if (j[static_cast<std::size_t>(a)] != 0) return a + 1;
  }
  return 0;
}

int total_order(const MultiIndexSet::Exponents& j) {
  int s = 0;
  for (int e : j) s += e;
  return s;
}

void enumerate(int dim, int order, bool single_variable, MultiIndexSet::Exponents& current, int coord,
               int remaining, std::vector<MultiIndexSet::Exponents>& out) {
  if (coord == dim) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    if (single_variable && e > 0 && remaining < order) break;  // another coordinate already used
    current[static_cast<std::size_t>(coord)] = e;
    enumerate(dim, order, single_variable, current, coord + 1, remaining - e, out);
  }
  current[static_cast<std::size_t>(coord)] = 0;
}

}  // namespace

std::size_t multi_index_count(Structure structure, int dim, int order) {
  if (dim < 1 || order < 0) return 0;
  const auto d = static_cast<std::size_t>(dim);
  const auto o = static_cast<std::size_t>(order);
  if (structure == Structure::KRSV) {
    if (o != 0 && d > (kSaturated - 1) / o) return kSaturated;
    return d * o + 1;
  }
  return binomial_saturating(d + o, o);
}

MultiIndexSet build_multi_index_set(Structure structure, int dim, int order, std::size_t cap) {
  if (dim < 1) throw InvalidArgument("multi-index set needs dimension >= 1, got " + std::to_string(dim));
  if (order < 0) throw InvalidArgument("multi-index set needs order >= 0, got " + std::to_string(order));
  const std::size_t count = multi_index_count(structure, dim, order);
  if (count > cap) {
    throw CapacityExceeded(to_string(structure) + " basis with D=" + std::to_string(dim) + ", O=" +
                               std::to_string(order) + " needs " +
                               (count == kSaturated ? std::string("more than 2^64") : std::to_string(count)) +
                               " terms, above the cap of " + std::to_string(cap),
                           count, cap);
  }

  MultiIndexSet set;
  set.structure_ = structure;
  set.dim_ = dim;
  set.order_ = order;
  set.indices_.reserve(count);
  MultiIndexSet::Exponents current(static_cast<std::size_t>(dim), 0);
  enumerate(dim, order, structure == Structure::KRSV, current, 0, order, set.indices_);

  std::sort(set.indices_.begin(), set.indices_.end(), [](const auto& a, const auto& b) {
    const int ba = block_of(a), bb = block_of(b);
    if (ba != bb) return ba < bb;
    const int oa = total_order(a), ob = total_order(b);
    if (oa != ob) return oa < ob;
    return a < b;
  });

  const auto K = set.indices_.size();
  set.blocks_.resize(K);
  set.factors_.resize(K);
  set.linear_terms_.assign(static_cast<std::size_t>(dim), -1);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& j = set.indices_[k];
    set.blocks_[k] = block_of(j);
    for (int a = 0; a < dim; ++a) {
      const int e = j[static_cast<std::size_t>(a)];
      if (e > 0) set.factors_[k].push_back({a, e});
    }
    if (total_order(j) == 1) set.linear_terms_[static_cast<std::size_t>(set.blocks_[k] - 1)] = static_cast<Eigen::Index>(k);
  }

  set.row_sizes_.assign(static_cast<std::size_t>(dim), static_cast<Eigen::Index>(K));
  if (is_triangular(structure)) {
    for (int d = 1; d <= dim; ++d) {
      const auto it = std::upper_bound(set.blocks_.begin(), set.blocks_.end(), d);
      set.row_sizes_[static_cast<std::size_t>(d - 1)] = it - set.blocks_.begin();
    }
  }
  return set;
}

void univariate_values(Family family, double x, int max_degree, double* values, double* derivs) {
  values[0] = 1.0;
  derivs[0] = 0.0;
  if (max_degree == 0) return;
  values[1] = x;
  derivs[1] = 1.0;
  for (int n = 1; n < max_degree; ++n) {
    if (family == Family::HermiteProbabilist) {
      values[n + 1] = x * values[n] - n * values[n - 1];
    } else {
      values[n + 1] = x * values[n];
    }
    derivs[n + 1] = (n + 1) * values[n];  // He_n' = n He_{n-1};  (x^n)' = n x^{n-1}
  }
}

namespace {

// Per-coordinate tables: values(a, n) = psi_n(x_a), derivs(a, n) = psi_n'(x_a).
struct UnivariateTable {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values, derivs;
};

UnivariateTable tabulate(const MultiIndexSet& set, Family family, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != set.dim()) {
    throw InvalidArgument("basis evaluation: point has dimension " + std::to_string(x.size()) + ", basis has " +
                          std::to_string(set.dim()));
  }
  if (!x.allFinite()) throw NonFiniteInput("basis evaluation: non-finite input");
  const int O = set.order();
  UnivariateTable t;
  t.values.resize(set.dim(), O + 1);
  t.derivs.resize(set.dim(), O + 1);
  for (int a = 0; a < set.dim(); ++a) {
    univariate_values(family, x[a], O, t.values.row(a).data(), t.derivs.row(a).data());
  }
  return t;
}

}  // namespace

Eigen::VectorXd eval_basis(const MultiIndexSet& set, Family family, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto t = tabulate(set, family, x);
  Eigen::VectorXd phi(set.size());
  for (Eigen::Index k = 0; k < set.size(); ++k) {
    double v = 1.0;
    for (const auto& f : set.factors(k)) v *= t.values(f.coord, f.exponent);
    phi[k] = v;
  }
  return phi;
}

void eval_basis_and_jacobian(const MultiIndexSet& set, Family family, const Eigen::Ref<const Eigen::VectorXd>& x,
                             Eigen::Ref<Eigen::VectorXd> phi, Eigen::Ref<Eigen::MatrixXd> jac) {
  const auto t = tabulate(set, family, x);
  jac.setZero();
  for (Eigen::Index k = 0; k < set.size(); ++k) {
    const auto& fs = set.factors(k);
    double v = 1.0;
    for (const auto& f : fs) v *= t.values(f.coord, f.exponent);
    phi[k] = v;
    for (std::size_t m = 0; m < fs.size(); ++m) {
      double g = t.derivs(fs[m].coord, fs[m].exponent);
      for (std::size_t l = 0; l < fs.size(); ++l) {
        if (l != m) g *= t.values(fs[l].coord, fs[l].exponent);
      }
      jac(k, fs[m].coord) = g;
    }
  }
}

Eigen::MatrixXd eval_basis_jacobian(const MultiIndexSet& set, Family family,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd phi(set.size());
  Eigen::MatrixXd jac(set.size(), set.dim());
  eval_basis_and_jacobian(set, family, x, phi, jac);
  return jac;
}

Eigen::VectorXd eval_basis_partial(const MultiIndexSet& set, Family family,
                                   const Eigen::Ref<const Eigen::VectorXd>& x, int coord) {
  if (coord < 0 || coord >= set.dim()) {
    throw InvalidArgument("basis partial: coordinate " + std::to_string(coord) + " outside [0, " +
                          std::to_string(set.dim()) + ")");
  }
  return eval_basis_jacobian(set, family, x).col(coord);
}

}  // namespace otmap
