#include "stbem/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace stbem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T v;
  if (!(ss >> v) || !(ss >> std::ws).eof())
    throw config_error("config: malformed value for '" + key + "': " + value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw config_error("config: malformed boolean for '" + key + "': " + value);
}

}  // namespace

void apply_override(run_config& cfg, const std::string& key, const std::string& value) {
  if (key == "problem") cfg.problem = value;
  else if (key == "mesh") cfg.mesh = value;
  else if (key == "mesh_format") cfg.mesh_format = value;
  else if (key == "flip_orientation") cfg.flip_orientation = parse_bool(key, value);
  else if (key == "level") cfg.level = parse_number<int>(key, value);
  else if (key == "cfl") cfg.cfl = parse_number<double>(key, value);
  else if (key == "horizon") cfg.horizon = parse_number<double>(key, value);
  else if (key == "wave_speed") cfg.wave_speed = parse_number<double>(key, value);
  else if (key == "stochastic_dim") cfg.stochastic_dim = parse_number<int>(key, value);
  else if (key == "degree") cfg.degree = parse_number<int>(key, value);
  else if (key == "quad.stochastic_order")
    cfg.quad_stochastic_order = parse_number<int>(key, value);
  else if (key == "quad.time_order") cfg.quad_time_order = parse_number<int>(key, value);
  else if (key == "quad.triangle_order")
    cfg.quad_triangle_order = parse_number<int>(key, value);
  else if (key == "quad.outer_order") cfg.quad_outer_order = parse_number<int>(key, value);
  else if (key == "quad.touching_refine") cfg.touching_refine = parse_number<int>(key, value);
  else if (key == "output") cfg.output_dir = value;
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") cfg.threads = parse_number<int>(key, value);
  else if (key == "sweep") cfg.sweep = value;
  else if (key == "sweep_min") cfg.sweep_min = parse_number<int>(key, value);
  else if (key == "sweep_max") cfg.sweep_max = parse_number<int>(key, value);
  else if (key == "benchmark_degree") cfg.benchmark_degree = parse_number<int>(key, value);
  else if (key == "mc_samples") cfg.mc_samples = parse_number<int>(key, value);
  else if (key == "inject_v_perturbation")
    cfg.inject_v_perturbation = parse_bool(key, value);
  else
    throw config_error("config: unknown key '" + key + "'");
}

run_config parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("config: cannot open " + path);
  run_config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: " + path + ":" + std::to_string(line_no) +
                         ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const config_error& e) {
      throw config_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void validate_config(const run_config& cfg) {
  if (cfg.problem.empty()) throw config_error("config.problem: must not be empty");
  if (!cfg.mesh.empty() && cfg.mesh != "icosphere" && cfg.mesh != "cube" &&
      cfg.mesh.rfind("import:", 0) != 0)
    throw config_error("config.mesh: expected icosphere, cube or import:<path>");
  if (cfg.mesh_format != "off" && cfg.mesh_format != "obj")
    throw config_error("config.mesh_format: expected off or obj");
  if (cfg.level < 1) throw config_error("config.level: must be >= 1");
  if (cfg.cfl != -1.0 && !(cfg.cfl > 0.0)) throw config_error("config.cfl: must be > 0");
  if (cfg.horizon != -1.0 && !(cfg.horizon > 0.0))
    throw config_error("config.horizon: must be > 0");
  if (cfg.wave_speed != -1.0 && !(cfg.wave_speed > 0.0))
    throw config_error("config.wave_speed: must be > 0");
  if (cfg.stochastic_dim != -1 && cfg.stochastic_dim < 1)
    throw config_error("config.stochastic_dim: must be >= 1");
  if (cfg.degree != -1 && cfg.degree < 0) throw config_error("config.degree: must be >= 0");
  if (cfg.quad_stochastic_order < 0)
    throw config_error("config.quad.stochastic_order: must be >= 0");
  if (cfg.quad_time_order < 1) throw config_error("config.quad.time_order: must be >= 1");
  if (cfg.quad_triangle_order < 1)
    throw config_error("config.quad.triangle_order: must be >= 1");
  if (cfg.quad_outer_order < 1) throw config_error("config.quad.outer_order: must be >= 1");
  if (cfg.touching_refine < 0 || cfg.touching_refine > 6)
    throw config_error("config.quad.touching_refine: must be in [0, 6]");
  if (cfg.threads < 0) throw config_error("config.threads: must be >= 0");
  if (cfg.sweep != "degrees" && cfg.sweep != "levels")
    throw config_error("config.sweep: expected degrees or levels");
  if (cfg.sweep_min < 0 || cfg.sweep_max < cfg.sweep_min)
    throw config_error("config.sweep_min/sweep_max: need 0 <= min <= max");
  if (cfg.mc_samples < 2) throw config_error("config.mc_samples: must be >= 2");
}

int effective_threads(const run_config& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("STBEM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace stbem
