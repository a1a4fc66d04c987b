#include "stbem/pc_basis.hpp"

#include <cmath>
#include <stdexcept>

#include "stbem/gauss.hpp"

namespace stbem {

namespace {
constexpr int kMaxLegendreDegree = 128;
}

multi_index_set::multi_index_set(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1) throw std::invalid_argument("multi_index_set: dim must be >= 1");
  if (max_degree < 0) throw std::invalid_argument("multi_index_set: max_degree must be >= 0");
  std::size_t s = 1;
  for (int m = 0; m < dim; ++m) {
    std::size_t next = s * static_cast<std::size_t>(max_degree + 1);
    if (next / (max_degree + 1) != s) throw std::invalid_argument("multi_index_set: overflow");
    s = next;
  }
  size_ = s;
}

std::vector<int> multi_index_set::decode(std::size_t linear) const {
  if (linear >= size_) throw std::out_of_range("multi_index_set::decode");
  std::vector<int> kappa(dim_);
  std::size_t radix = static_cast<std::size_t>(max_degree_ + 1);
  for (int m = 0; m < dim_; ++m) {
    kappa[m] = static_cast<int>(linear % radix);
    linear /= radix;
  }
  return kappa;
}

std::size_t multi_index_set::encode(std::span<const int> kappa) const {
  if (static_cast<int>(kappa.size()) != dim_)
    throw std::invalid_argument("multi_index_set::encode: dimension mismatch");
  std::size_t radix = static_cast<std::size_t>(max_degree_ + 1);
  std::size_t linear = 0;
  std::size_t stride = 1;
  for (int m = 0; m < dim_; ++m) {
    if (kappa[m] < 0 || kappa[m] > max_degree_)
      throw std::out_of_range("multi_index_set::encode: component out of range");
    linear += stride * static_cast<std::size_t>(kappa[m]);
    stride *= radix;
  }
  return linear;
}

double eval_legendre_orthonormal(int degree, double xi) {
  if (degree < 0 || degree > kMaxLegendreDegree)
    throw std::invalid_argument("eval_legendre_orthonormal: degree out of range");
  double p0 = 1.0, p1 = xi;
  if (degree == 0) return 1.0;
  for (int k = 2; k <= degree; ++k) {
    double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * degree + 1.0) * p1;
}

pc_basis::pc_basis(multi_index_set iset, int quad_order)
    : iset_(iset), quad_order_(quad_order > 0 ? quad_order : 2 * iset.max_degree() + 4) {}

double pc_basis::eval(std::span<const int> kappa, std::span<const double> xi) const {
  if (static_cast<int>(kappa.size()) != iset_.dim() ||
      static_cast<int>(xi.size()) != iset_.dim())
    throw std::invalid_argument("pc_basis::eval: dimension mismatch");
  double v = 1.0;
  for (int m = 0; m < iset_.dim(); ++m) v *= eval_legendre_orthonormal(kappa[m], xi[m]);
  return v;
}

double pc_basis::eval(std::size_t mode, std::span<const double> xi) const {
  std::vector<int> kappa = iset_.decode(mode);
  return eval(kappa, xi);
}

Eigen::MatrixXd pc_basis::gram_matrix(
    const std::function<double(std::span<const double>)>& g) const {
  const int n = iset_.dim();
  const int q = quad_order_;
  const std::size_t n_modes = iset_.size();
  const gauss_rule& rule = gauss_legendre(q);

  // Tensor grid, little-endian node index; probability weights dxi/2 per dim.
  std::size_t n_nodes = 1;
  for (int m = 0; m < n; ++m) n_nodes *= static_cast<std::size_t>(q);

  // 1D orthonormal Legendre table, shared by all dimensions.
  Eigen::MatrixXd psi(iset_.max_degree() + 1, q);
  for (int d = 0; d <= iset_.max_degree(); ++d)
    for (int k = 0; k < q; ++k) psi(d, k) = eval_legendre_orthonormal(d, rule.nodes[k]);

  std::vector<double> gv(n_nodes);
  std::vector<double> xi(n);
  std::vector<int> node(n, 0);
  for (std::size_t idx = 0; idx < n_nodes; ++idx) {
    double w = 1.0;
    for (int m = 0; m < n; ++m) {
      xi[m] = rule.nodes[node[m]];
      w *= 0.5 * rule.weights[node[m]];
    }
    double val = g(xi);
    if (!std::isfinite(val)) throw std::runtime_error("gram_matrix: non-finite integrand sample");
    gv[idx] = w * val;
    for (int m = 0; m < n; ++m) {
      if (++node[m] < q) break;
      node[m] = 0;
    }
  }

  Eigen::MatrixXd S(n_modes, n_modes);
  std::vector<int> ki, kj;
  for (std::size_t i = 0; i < n_modes; ++i) {
    ki = iset_.decode(i);
    for (std::size_t j = i; j < n_modes; ++j) {
      kj = iset_.decode(j);
      double acc = 0.0;
      std::fill(node.begin(), node.end(), 0);
      for (std::size_t idx = 0; idx < n_nodes; ++idx) {
        double p = 1.0;
        for (int m = 0; m < n; ++m) p *= psi(ki[m], node[m]) * psi(kj[m], node[m]);
        acc += gv[idx] * p;
        for (int m = 0; m < n; ++m) {
          if (++node[m] < q) break;
          node[m] = 0;
        }
      }
      S(i, j) = acc;
      S(j, i) = acc;
    }
  }
  return S;
}

Eigen::VectorXd pc_mean(const Eigen::MatrixXd& modes) {
  if (modes.rows() < 1) throw std::invalid_argument("pc_mean: no modes");
  return modes.row(0).transpose();
}

Eigen::VectorXd pc_variance(const Eigen::MatrixXd& modes) {
  if (modes.rows() < 1) throw std::invalid_argument("pc_variance: no modes");
  Eigen::VectorXd var = Eigen::VectorXd::Zero(modes.cols());
  for (Eigen::Index i = 1; i < modes.rows(); ++i)
    var += modes.row(i).transpose().cwiseAbs2();
  return var;
}

Eigen::VectorXd sample_expansion(const pc_basis& basis, const Eigen::MatrixXd& modes,
                                 std::span<const double> xi) {
  if (static_cast<std::size_t>(modes.rows()) != basis.n_modes())
    throw std::invalid_argument("sample_expansion: mode count mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(modes.cols());
  for (std::size_t i = 0; i < basis.n_modes(); ++i)
    out += basis.eval(i, xi) * modes.row(i).transpose();
  return out;
}

}  // namespace stbem
