#ifndef STBEM_PROBLEM_HPP
#define STBEM_PROBLEM_HPP

#include <string>
#include <vector>

#include "stbem/mesh.hpp"
#include "stbem/pc_basis.hpp"
#include "stbem/solver.hpp"

namespace stbem {

enum class problem_kind { dirichlet_single_layer, acoustic_second_kind };

/// Absorption coefficient on one patch as an affine map of a stochastic
/// component: alpha(x, xi) = offset + scale * xi[component] for x in patch.
/// An empty patch name covers the whole surface.
struct alpha_patch_spec {
  std::string patch_name;
  double offset = 1.0;
  double scale = 0.0;
  int component = 0;
};

struct problem_spec {
  std::string name;
  problem_kind kind = problem_kind::dirichlet_single_layer;
  space_time_xi_fn rhs;
  space_time_xi_fn rhs_dt;  // optional analytic time derivative
  std::vector<alpha_patch_spec> alpha;
  int stochastic_dim = 1;
  int degree = 2;
  double cfl = 0.5;
  double horizon = 1.0;
  double wave_speed = 1.0;
  double sigma = 0.0;  // exponential time weight of the analysis; 0 in all computations
  std::string default_mesh = "icosphere";
};

/// Bundled benchmark problems:
///  - "dirichlet-sphere": wave-train Dirichlet data on the unit sphere,
///    k = (0.2, 0.2, 0.2), Xi = [-1,1]^3, T = 2, CFL 0.605.
///  - "acoustic-cube-2ndkind": second-kind impedance problem on the cube with
///    a deterministic radial pulse source, alpha ~ U(0.1, 1.9), T = 3, CFL 0.387.
///  - "acoustic-cube-2ndkind-patch": as above with alpha ~ U(1.5, 2.5) on the
///    top patch and alpha ~ U(3, 4) elsewhere, Xi = [-1,1]^2.
problem_spec builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();

/// Named right-hand-side families usable from problem files.
space_time_xi_fn named_rhs(const std::string& name);
space_time_xi_fn named_rhs_dt(const std::string& name);  // may return nullptr

/// Resolves patch specs against the mesh: Gram matrices per alpha patch and
/// the element-to-patch map. Validates positivity of alpha.
stochastic_alpha build_stochastic_alpha(const problem_spec& spec, const pc_basis& basis,
                                        const surface_mesh& mesh);

/// Pointwise alpha per element for one stochastic sample (Monte Carlo path).
Eigen::VectorXd alpha_at_sample(const problem_spec& spec, const surface_mesh& mesh,
                                std::span<const double> xi);

}  // namespace stbem

#endif
