#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "stbem/runner.hpp"

namespace {

using stbem::run_config;

void add_common_options(CLI::App* cmd, run_config& cfg, std::string& config_path,
                        std::vector<std::string>& overrides) {
  cmd->add_option("--config", config_path, "Configuration file (key = value lines)");
  cmd->add_option("--set", overrides, "Override a config key, e.g. --set degree=4");
  cmd->add_option("--problem", cfg.problem, "Builtin problem name or file:<path>");
  cmd->add_option("--mesh", cfg.mesh, "icosphere | cube | import:<path>");
  cmd->add_option("--level", cfg.level, "Mesh refinement level");
  cmd->add_option("--degree", cfg.degree, "Polynomial chaos degree J");
  cmd->add_option("--cfl", cfg.cfl, "CFL number c dt / h");
  cmd->add_option("--horizon", cfg.horizon, "Time horizon T");
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = auto)");
  cmd->add_option("--seed", cfg.seed, "Random seed");
  cmd->add_option("--output", cfg.output_dir, "Output directory");
}

run_config finalize_config(const std::string& config_path,
                           const std::vector<std::string>& overrides, const run_config& cli) {
  // File first, then CLI values that differ from the defaults, then --set.
  run_config cfg = config_path.empty() ? run_config{} : stbem::parse_config_file(config_path);
  const run_config defaults;
  auto take = [&](auto member) {
    if (cli.*member != defaults.*member) cfg.*member = cli.*member;
  };
  take(&run_config::problem);
  take(&run_config::mesh);
  take(&run_config::level);
  take(&run_config::degree);
  take(&run_config::cfl);
  take(&run_config::horizon);
  take(&run_config::threads);
  take(&run_config::seed);
  take(&run_config::output_dir);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw stbem::config_error("--set expects key=value, got '" + kv + "'");
    stbem::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  stbem::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stbem - stochastic space-time boundary elements for the acoustic wave equation"};
  app.require_subcommand(1);

  run_config cli;
  std::string config_path;
  std::vector<std::string> overrides;

  auto* c_mesh = app.add_subcommand("mesh", "Generate or import a mesh and report statistics");
  auto* c_solve = app.add_subcommand("solve", "Assemble and march a problem");
  auto* c_conv = app.add_subcommand("convergence", "Run a degree or level sweep");
  auto* c_post = app.add_subcommand("postprocess", "Field-point pressures and spectra");
  auto* c_val = app.add_subcommand("validate", "Run the invariant suites");

  for (CLI::App* c : {c_mesh, c_solve, c_conv, c_post, c_val})
    add_common_options(c, cli, config_path, overrides);

  std::string sweep;
  c_conv->add_option("--sweep", sweep, "degrees | levels");
  int sweep_min = -1, sweep_max = -1, benchmark_degree = -1;
  c_conv->add_option("--sweep-min", sweep_min);
  c_conv->add_option("--sweep-max", sweep_max);
  c_conv->add_option("--benchmark-degree", benchmark_degree);

  std::string solution_path;
  std::vector<std::string> point_strings;
  bool with_spectrum = false;
  c_post->add_option("--solution", solution_path, "Solution container (.stbs)")->required();
  c_post->add_option("--point", point_strings, "Field point as x,y,z (repeatable)")->required();
  c_post->add_flag("--spectrum", with_spectrum, "Also write an A-weighted SPL spectrum");

  bool inject = false;
  c_val->add_flag("--inject-v-perturbation", inject,
                  "Test hook: corrupt one single-layer entry before the checks");

  CLI11_PARSE(app, argc, argv);

  try {
    run_config cfg = finalize_config(config_path, overrides, cli);
    if (!sweep.empty()) cfg.sweep = sweep;
    if (sweep_min >= 0) cfg.sweep_min = sweep_min;
    if (sweep_max >= 0) cfg.sweep_max = sweep_max;
    if (benchmark_degree >= 0) cfg.benchmark_degree = benchmark_degree;
    if (inject) cfg.inject_v_perturbation = true;
    stbem::validate_config(cfg);

    if (app.got_subcommand(c_mesh)) return stbem::cmd_mesh(cfg, std::cout);
    if (app.got_subcommand(c_solve)) return stbem::cmd_solve(cfg, std::cout);
    if (app.got_subcommand(c_conv)) return stbem::cmd_convergence(cfg, std::cout);
    if (app.got_subcommand(c_val)) return stbem::cmd_validate(cfg, std::cout);
    if (app.got_subcommand(c_post)) {
      std::vector<Eigen::Vector3d> points;
      for (const std::string& ps : point_strings) {
        Eigen::Vector3d p;
        char c1, c2;
        std::istringstream ss(ps);
        if (!(ss >> p.x() >> c1 >> p.y() >> c2 >> p.z()) || c1 != ',' || c2 != ',')
          throw stbem::config_error("--point expects x,y,z, got '" + ps + "'");
        points.push_back(p);
      }
      return stbem::cmd_postprocess(cfg, solution_path, points, with_spectrum, std::cout);
    }
    return stbem::exit_usage;
  } catch (const stbem::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stbem::exit_validation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stbem::exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return stbem::exit_runtime;
  }
}
