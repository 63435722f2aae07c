#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace otmap {

enum class Structure { Dense, KR, KRSV };
enum class Family { HermiteProbabilist, Monomial };

std::string to_string(Structure s);
std::string to_string(Family f);
Structure parse_structure(std::string_view text);
Family parse_family(std::string_view text);

// True for the lower-triangular structures.
inline bool is_triangular(Structure s) { return s != Structure::Dense; }

inline constexpr std::size_t kDefaultTermCap = 1'000'000;

// Ordered set of D-long exponent vectors.
//
// Ordering is canonical: terms are grouped by their triangular block (the
// smallest d such that j_i = 0 for every i > d, with the constant term first),
// then by total order, then lexicographically.  With this ordering the first
// K_d terms depend on x_1..x_d only, which is what makes row d of a
// triangular weight matrix a prefix.
class MultiIndexSet {
 public:
  using Exponents = std::vector<int>;

  Structure structure() const { return structure_; }
  int dim() const { return dim_; }
  int order() const { return order_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
  const std::vector<Exponents>& indices() const { return indices_; }
  const Exponents& index(Eigen::Index k) const { return indices_[static_cast<std::size_t>(k)]; }

  // K_1..K_D.  For Dense every entry equals size(): no structural zeros.
  const std::vector<Eigen::Index>& row_sizes() const { return row_sizes_; }
  Eigen::Index row_size(int coord) const { return row_sizes_[static_cast<std::size_t>(coord)]; }

  // Block of term k: 0 for the constant, otherwise 1-based coordinate.
  int block(Eigen::Index k) const { return blocks_[static_cast<std::size_t>(k)]; }

  // Position of the degree-1 term in coordinate `coord` (0-based).
  Eigen::Index linear_term(int coord) const { return linear_terms_[static_cast<std::size_t>(coord)]; }

  // Sparse view of term k: the (coordinate, exponent) pairs with exponent > 0.
  struct Factor {
    int coord;
    int exponent;
  };
  const std::vector<Factor>& factors(Eigen::Index k) const { return factors_[static_cast<std::size_t>(k)]; }

  bool operator==(const MultiIndexSet& other) const {
    return structure_ == other.structure_ && dim_ == other.dim_ && order_ == other.order_ &&
           indices_ == other.indices_;
  }

 private:
  friend MultiIndexSet build_multi_index_set(Structure, int, int, std::size_t);

  Structure structure_ = Structure::Dense;
  int dim_ = 0;
  int order_ = 0;
  std::vector<Exponents> indices_;
  std::vector<Eigen::Index> row_sizes_;
  std::vector<int> blocks_;
  std::vector<Eigen::Index> linear_terms_;
  std::vector<std::vector<Factor>> factors_;
};

// Number of terms the set would contain, saturating at SIZE_MAX.
std::size_t multi_index_count(Structure structure, int dim, int order);

MultiIndexSet build_multi_index_set(Structure structure, int dim, int order,
                                    std::size_t cap = kDefaultTermCap);

// psi_0..psi_max_degree and their derivatives at x.
void univariate_values(Family family, double x, int max_degree, double* values, double* derivs);

Eigen::VectorXd eval_basis(const MultiIndexSet& set, Family family, const Eigen::Ref<const Eigen::VectorXd>& x);

// K x D matrix of first partials.
Eigen::MatrixXd eval_basis_jacobian(const MultiIndexSet& set, Family family,
                                    const Eigen::Ref<const Eigen::VectorXd>& x);

// Column `coord` (0-based) of eval_basis_jacobian.
Eigen::VectorXd eval_basis_partial(const MultiIndexSet& set, Family family,
                                   const Eigen::Ref<const Eigen::VectorXd>& x, int coord);

// Fills phi (K) and jac (K x D) in one pass; used by the solvers' caches.
void eval_basis_and_jacobian(const MultiIndexSet& set, Family family, const Eigen::Ref<const Eigen::VectorXd>& x,
                             Eigen::Ref<Eigen::VectorXd> phi, Eigen::Ref<Eigen::MatrixXd> jac);

}  // namespace otmap
