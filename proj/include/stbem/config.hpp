#ifndef STBEM_CONFIG_HPP
#define STBEM_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stbem {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat, typed run configuration. Values of -1 (or empty) defer to the
/// selected problem's defaults. Unknown keys are rejected at parse time.
struct run_config {
  std::string problem = "dirichlet-sphere";
  std::string mesh = "";            // icosphere | cube | import:<path>; "" = problem default
  std::string mesh_format = "off";  // for import
  bool flip_orientation = false;
  int level = 1;

  double cfl = -1.0;
  double horizon = -1.0;
  double wave_speed = -1.0;
  int stochastic_dim = -1;
  int degree = -1;

  int quad_stochastic_order = 0;  // 0 = 2J+4
  int quad_time_order = 4;
  int quad_triangle_order = 3;
  int quad_outer_order = 4;
  int touching_refine = 2;

  std::string output_dir = "stbem-run";
  std::uint64_t seed = 20240101;
  int threads = 0;  // 0 = STBEM_THREADS env or hardware

  // convergence sweeps
  std::string sweep = "degrees";  // degrees | levels
  int sweep_min = 0;
  int sweep_max = 4;
  int benchmark_degree = -1;  // -1 = sweep_max + 4

  // monte carlo / validation
  int mc_samples = 200;
  bool inject_v_perturbation = false;  // test hook: corrupts one V entry
};

/// Parses `key = value` lines ('#' comments). Unknown keys or malformed
/// values raise config_error naming the key.
run_config parse_config_file(const std::string& path);

/// Applies one `key=value` override (same keys as the file format).
void apply_override(run_config& cfg, const std::string& key, const std::string& value);

/// Cross-field validation; throws config_error with a field path.
void validate_config(const run_config& cfg);

/// Effective thread count: cfg.threads, else STBEM_THREADS, else hardware.
int effective_threads(const run_config& cfg);

}  // namespace stbem

#endif
