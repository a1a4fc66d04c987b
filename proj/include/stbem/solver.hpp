#ifndef STBEM_SOLVER_HPP
#define STBEM_SOLVER_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "stbem/kernels.hpp"
#include "stbem/mesh.hpp"
#include "stbem/pc_basis.hpp"
#include "stbem/solution.hpp"

namespace stbem {

using space_time_xi_fn =
    std::function<double(double, const Eigen::Vector3d&, std::span<const double>)>;

struct rhs_projection_options {
  int time_order = 4;       // Gauss points per time step
  int triangle_order = 3;   // collapsed Gauss per direction on elements
  int stochastic_order = 0; // 0 -> basis default (2J+4 per dimension)
  double fd_step_rel = 0.02;// central-difference step as a fraction of dt
  int threads = 0;
};

/// Galerkin right-hand side F_i^{l,r} = int_Xi int_{I_l} int_{Gamma_r}
/// g Psi_i dpi dt ds with g = d/dt f (apply_time_derivative) or g = f.
/// The time derivative uses dfdt when provided, otherwise fourth-order
/// central differences. Throws on non-finite samples, reporting (t,x,xi).
mode_tensor project_rhs(const space_time_xi_fn& f, const space_time_xi_fn& dfdt,
                        const pc_basis& basis, const surface_mesh& mesh,
                        const time_grid& grid, bool apply_time_derivative,
                        const rhs_projection_options& opts = {});

struct solve_options {
  int threads = 0;
};

/// Marching-on-in-time solution of the block-diagonal stochastic system:
/// for each mode i and step l, V^0 phi_i^l = F_i^l - sum_{m<l} V^{l-m} phi_i^m.
/// V^0 is factorized once; modes solve independently.
stochastic_solution mot_dirichlet(const toeplitz_blocks& V, const mode_tensor& F,
                                  const pc_basis& basis, const surface_mesh& mesh,
                                  const time_grid& grid, const solve_options& opts = {});

/// Stochastic Gram matrices of the absorption coefficient, one per patch of
/// elements: S_p(i,i') = int alpha_p(xi) Psi_i Psi_i' dpi.
struct stochastic_alpha {
  std::vector<Eigen::MatrixXd> S;  // one per alpha patch
  std::vector<int> patch_of_elem;  // alpha patch index per element
};

/// Second-kind acoustic solve: per step l
///   [I (x) (-dt/2 M + K'^0) - S(alpha) (x) V^0] p^l
///     = G^l - sum_{m<l} [I (x) K'^{l-m} - S(alpha) (x) V^{l-m}] p^m
/// with M the diagonal spatial mass. The step matrix is materialized and
/// factorized once; history terms are applied Kronecker-aware per mode.
stochastic_solution mot_second_kind(const toeplitz_blocks& V, const toeplitz_blocks& Kp,
                                    const stochastic_alpha& alpha,
                                    const Eigen::VectorXd& mass_diag, const mode_tensor& G,
                                    const pc_basis& basis, const surface_mesh& mesh,
                                    const time_grid& grid, const solve_options& opts = {});

/// Deterministic second-kind marching with a fixed per-element alpha.
/// Returns the density as a (steps x elements) matrix.
Eigen::MatrixXd det_second_kind(const toeplitz_blocks& V, const toeplitz_blocks& Kp,
                                const Eigen::VectorXd& alpha_of_elem,
                                const Eigen::VectorXd& mass_diag, const Eigen::MatrixXd& G);

/// Deterministic Dirichlet marching (single mode). F is (steps x elements).
Eigen::MatrixXd det_dirichlet(const toeplitz_blocks& V, const Eigen::MatrixXd& F);

struct mc_statistics {
  Eigen::MatrixXd mean, variance;        // unbiased
  Eigen::MatrixXd se_mean, se_variance;  // standard errors
  std::size_t n_samples = 0;
};

/// Monte Carlo reference: draws xi ~ U(-1,1)^dim with per-sample RNG streams
/// derived from the seed (bit-reproducible for a fixed seed, independent of
/// thread count) and accumulates field statistics of deterministic_solve(xi).
mc_statistics mc_reference_solve(
    int stochastic_dim, std::size_t n_samples, std::uint64_t seed,
    const std::function<Eigen::MatrixXd(std::span<const double>)>& deterministic_solve,
    int threads = 0);

}  // namespace stbem

#endif
