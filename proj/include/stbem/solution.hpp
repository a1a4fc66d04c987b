#ifndef STBEM_SOLUTION_HPP
#define STBEM_SOLUTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace stbem {

/// Dense coefficient tensor indexed by (stochastic mode, time step, element),
/// mode-major. Shared layout for right-hand sides and solutions.
struct mode_tensor {
  std::size_t n_modes = 0, n_steps = 0, n_elems = 0;
  std::vector<double> data;

  mode_tensor() = default;
  mode_tensor(std::size_t nm, std::size_t ns, std::size_t ne)
      : n_modes(nm), n_steps(ns), n_elems(ne), data(nm * ns * ne, 0.0) {}

  double& at(std::size_t i, std::size_t m, std::size_t s) {
    return data[(i * n_steps + m) * n_elems + s];
  }
  double at(std::size_t i, std::size_t m, std::size_t s) const {
    return data[(i * n_steps + m) * n_elems + s];
  }
  Eigen::Map<Eigen::VectorXd> slab(std::size_t i, std::size_t m) {
    return {data.data() + (i * n_steps + m) * n_elems, static_cast<Eigen::Index>(n_elems)};
  }
  Eigen::Map<const Eigen::VectorXd> slab(std::size_t i, std::size_t m) const {
    return {data.data() + (i * n_steps + m) * n_elems, static_cast<Eigen::Index>(n_elems)};
  }
  bool same_shape(const mode_tensor& o) const {
    return n_modes == o.n_modes && n_steps == o.n_steps && n_elems == o.n_elems;
  }
};

/// Solution coefficients phi_i^{m,s} with the discretization metadata needed
/// to interpret them.
struct stochastic_solution {
  int stochastic_dim = 0;
  int max_degree = 0;
  double dt = 0.0;
  double wave_speed = 1.0;
  std::uint64_t mesh_hash = 0;
  mode_tensor coeff;

  /// Binary container: "STBS" magic, version, dims, basis spec, mesh hash,
  /// then 64-bit float payload in mode-major order (see README).
  void save(const std::string& path) const;
  static stochastic_solution load(const std::string& path);

  /// CSV slice of one mode: one row per time step, one column per element.
  void write_csv_slice(const std::string& path, std::size_t mode) const;
};

}  // namespace stbem

#endif
