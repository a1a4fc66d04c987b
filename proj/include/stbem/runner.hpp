#ifndef STBEM_RUNNER_HPP
#define STBEM_RUNNER_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "stbem/config.hpp"
#include "stbem/mesh.hpp"
#include "stbem/problem.hpp"

namespace stbem {

/// Exit codes of the command layer.
enum exit_code : int { exit_ok = 0, exit_usage = 1, exit_validation = 2, exit_runtime = 3 };

/// Resolves the problem selection ("builtin name" or "file:<path>") and
/// applies the config's overrides.
problem_spec resolve_problem(const run_config& cfg);

/// Builds the configured mesh (problem default when cfg.mesh is empty).
surface_mesh build_mesh(const run_config& cfg, const problem_spec& problem,
                        std::vector<std::string>* warnings = nullptr);

int cmd_mesh(const run_config& cfg, std::ostream& out);
int cmd_solve(const run_config& cfg, std::ostream& out);
int cmd_convergence(const run_config& cfg, std::ostream& out);
int cmd_postprocess(const run_config& cfg, const std::string& solution_path,
                    const std::vector<Eigen::Vector3d>& points, bool with_spectrum,
                    std::ostream& out);
int cmd_validate(const run_config& cfg, std::ostream& out);

}  // namespace stbem

#endif
