#ifndef STBEM_KERNELS_HPP
#define STBEM_KERNELS_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "stbem/mesh.hpp"
#include "stbem/solution.hpp"

namespace stbem {

enum class operator_tag { single_layer, adjoint_double_layer };

/// Sequence of spatial Galerkin blocks M^0..M^L of a retarded boundary
/// operator, indexed by time offset. Block j is empty whenever the light-cone
/// shell [t_{j-1}, t_{j+1}] misses the pairwise distance range (causality).
/// Immutable after assembly; concurrent reads are safe.
struct toeplitz_blocks {
  operator_tag tag = operator_tag::single_layer;
  double dt = 0.0;
  double wave_speed = 1.0;
  int truncation = 0;  // L; blocks beyond are identically zero
  Eigen::Index n_rows = 0, n_cols = 0;
  std::vector<Eigen::SparseMatrix<double>> blocks;  // size truncation+1

  bool has_block(int j) const {
    return j >= 0 && j <= truncation && blocks[j].nonZeros() > 0;
  }
  /// y += scale * M^j x (no-op for absent blocks).
  void apply_block(int j, const Eigen::VectorXd& x, Eigen::VectorXd& y,
                   double scale = 1.0) const;
  Eigen::MatrixXd dense_block(int j) const;
  double block_max_norm(int j) const;
  /// Max norm of the elementwise sum of all blocks (telescoping residual).
  double sum_max_norm() const;

  /// Triplet dump (j,row,col,value) for offline inspection.
  void dump_csv(const std::string& path) const;
};

struct assembly_options {
  int outer_order = 4;      // collapsed Gauss points per direction on the test element
  int touching_refine = 2;  // subdivision levels of the test element for touching pairs
  int threads = 0;          // 0 = hardware concurrency
};

/// Galerkin blocks of the retarded single layer operator for piecewise
/// constant ansatz and test functions in space and time.
toeplitz_blocks assemble_single_layer(const surface_mesh& mesh, const time_grid& grid,
                                      const assembly_options& opts = {});

/// Galerkin blocks of the retarded adjoint double layer operator, same
/// discretization. Entries between coplanar elements vanish identically.
toeplitz_blocks assemble_adjoint_double_layer(const surface_mesh& mesh,
                                              const time_grid& grid,
                                              const assembly_options& opts = {});

/// Diagonal spatial mass matrix with entries int_elem weight ds. Throws
/// std::invalid_argument on a nonpositive weight sample.
Eigen::VectorXd assemble_mass(const surface_mesh& mesh,
                              const std::function<double(const Eigen::Vector3d&)>& weight,
                              int quad_order = 3);

/// Single layer potential of a piecewise-constant density, evaluated per
/// stochastic mode at off-surface points and given times. Exact causality
/// through shell-restricted element integrals. Result: one (times x points)
/// matrix per mode. Points closer to the surface than min_distance_factor * h
/// are rejected.
std::vector<Eigen::MatrixXd> eval_single_layer_potential(
    const stochastic_solution& density, const surface_mesh& mesh,
    const std::vector<Eigen::Vector3d>& points, const std::vector<double>& times,
    double min_distance_factor = 1e-6);

}  // namespace stbem

#endif
