#ifndef STBEM_GAUSS_HPP
#define STBEM_GAUSS_HPP

#include <vector>

namespace stbem {

/// Gauss-Legendre rule on [-1,1].
struct gauss_rule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 2
};

/// Cached n-point Gauss-Legendre rule, n >= 1.
const gauss_rule& gauss_legendre(int n);

/// Quadrature rule on the unit reference triangle {a,b >= 0, a+b <= 1},
/// built from an n x n tensor Gauss rule on the collapsed square.
/// Weights sum to 1; a physical integral over a triangle of area A is
/// A * sum_i w_i f(x(a_i, b_i)).
struct triangle_rule {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> w;
};

const triangle_rule& triangle_gauss(int n);

}  // namespace stbem

#endif
