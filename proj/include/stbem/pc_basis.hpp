#ifndef STBEM_PC_BASIS_HPP
#define STBEM_PC_BASIS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stbem {

/// Truncated tensor multi-index set {kappa : 0 <= kappa_m <= max_degree, m = 1..dim}.
/// Linearization is mixed-radix base (max_degree+1) with the first dimension
/// least significant; encode/decode round-trip exactly.
class multi_index_set {
 public:
  multi_index_set(int dim, int max_degree);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return size_; }

  std::vector<int> decode(std::size_t linear) const;
  std::size_t encode(std::span<const int> kappa) const;

 private:
  int dim_;
  int max_degree_;
  std::size_t size_;
};

/// Value of the orthonormal Legendre polynomial sqrt(2n+1) P_n(xi) for the
/// uniform probability measure dxi/2 on [-1,1].
double eval_legendre_orthonormal(int degree, double xi);

/// Tensor Legendre polynomial chaos basis on Xi = [-1,1]^n with the uniform
/// product probability measure. Immutable after construction.
class pc_basis {
 public:
  /// quad_order: Gauss-Legendre points per dimension for stochastic
  /// integrals; 0 selects the default 2*max_degree+4.
  explicit pc_basis(multi_index_set iset, int quad_order = 0);

  const multi_index_set& index_set() const { return iset_; }
  int dim() const { return iset_.dim(); }
  int max_degree() const { return iset_.max_degree(); }
  std::size_t n_modes() const { return iset_.size(); }
  int quad_order() const { return quad_order_; }

  double eval(std::span<const int> kappa, std::span<const double> xi) const;
  double eval(std::size_t mode, std::span<const double> xi) const;

  /// S(g)_{ij} = int_Xi g Psi_i Psi_j dpi by tensor Gauss-Legendre quadrature.
  /// Exactly symmetric (entries computed once per unordered pair).
  Eigen::MatrixXd gram_matrix(const std::function<double(std::span<const double>)>& g) const;

 private:
  multi_index_set iset_;
  int quad_order_;
};

/// modes: one row per mode (row 0 = multi-index 0), columns are arbitrary
/// coefficients. Mean is row 0, variance the column sum of squares of the
/// remaining rows.
Eigen::VectorXd pc_mean(const Eigen::MatrixXd& modes);
Eigen::VectorXd pc_variance(const Eigen::MatrixXd& modes);

/// sum_kappa modes(kappa,:) Psi_kappa(xi), evaluated coefficientwise.
Eigen::VectorXd sample_expansion(const pc_basis& basis, const Eigen::MatrixXd& modes,
                                 std::span<const double> xi);

}  // namespace stbem

#endif
