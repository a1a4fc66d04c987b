#include "stbem/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "stbem/gauss.hpp"
#include "stbem/geometry.hpp"
#include "stbem/kernels.hpp"
#include "stbem/post.hpp"
#include "stbem/shell_quadrature.hpp"
#include "stbem/solver.hpp"

namespace stbem {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json config_json(const run_config& c) {
  return json{{"problem", c.problem},
              {"mesh", c.mesh},
              {"level", c.level},
              {"cfl", c.cfl},
              {"horizon", c.horizon},
              {"wave_speed", c.wave_speed},
              {"stochastic_dim", c.stochastic_dim},
              {"degree", c.degree},
              {"quad", {{"stochastic_order", c.quad_stochastic_order},
                        {"time_order", c.quad_time_order},
                        {"triangle_order", c.quad_triangle_order},
                        {"outer_order", c.quad_outer_order},
                        {"touching_refine", c.touching_refine}}},
              {"seed", c.seed},
              {"threads", c.threads},
              {"output", c.output_dir}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

fs::path prepare_run_dir(const run_config& cfg, const std::string& command) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  json manifest{{"command", command}, {"config", config_json(cfg)}};
  write_json(dir / "manifest.json", manifest);
  return dir;
}

problem_spec parse_problem_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("problem file: cannot open " + path);
  problem_spec p;
  p.name = "file:" + path;
  std::string rhs_name;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    std::string eq, value;
    ss >> eq;
    std::getline(ss, value);
    const auto b = value.find_first_not_of(" \t");
    value = b == std::string::npos ? "" : value.substr(b);
    auto bad = [&](const std::string& what) {
      throw config_error("problem file " + path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (eq != "=") bad("expected key = value");
    if (key == "kind") {
      if (value == "dirichlet") p.kind = problem_kind::dirichlet_single_layer;
      else if (value == "acoustic-2ndkind") p.kind = problem_kind::acoustic_second_kind;
      else bad("unknown kind '" + value + "'");
    } else if (key == "rhs") {
      rhs_name = value;
    } else if (key == "cfl") p.cfl = std::stod(value);
    else if (key == "horizon") p.horizon = std::stod(value);
    else if (key == "wave_speed") p.wave_speed = std::stod(value);
    else if (key == "stochastic_dim") p.stochastic_dim = std::stoi(value);
    else if (key == "degree") p.degree = std::stoi(value);
    else if (key == "mesh") p.default_mesh = value;
    else if (key.rfind("alpha.", 0) == 0) {
      // patch:offset:scale:component ("" patch = whole surface)
      alpha_patch_spec ap;
      std::istringstream as(value);
      std::string tok;
      std::getline(as, ap.patch_name, ':');
      if (!std::getline(as, tok, ':')) bad("alpha needs patch:offset:scale:component");
      ap.offset = std::stod(tok);
      if (!std::getline(as, tok, ':')) bad("alpha needs patch:offset:scale:component");
      ap.scale = std::stod(tok);
      if (!std::getline(as, tok, ':')) bad("alpha needs patch:offset:scale:component");
      ap.component = std::stoi(tok);
      p.alpha.push_back(ap);
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  if (rhs_name.empty()) throw config_error("problem file " + path + ": missing rhs");
  p.rhs = named_rhs(rhs_name);
  p.rhs_dt = named_rhs_dt(rhs_name);
  return p;
}

struct assembled_problem {
  problem_spec problem;
  surface_mesh mesh;
  time_grid grid;
  pc_basis basis;
  toeplitz_blocks V;
  toeplitz_blocks Kp;          // acoustic only
  stochastic_alpha alpha;      // acoustic only
  Eigen::VectorXd mass;        // acoustic only
  mode_tensor F;
  double t_assemble = 0.0, t_rhs = 0.0;
};

assembly_options assembly_opts(const run_config& cfg) {
  assembly_options a;
  a.outer_order = cfg.quad_outer_order;
  a.touching_refine = cfg.touching_refine;
  a.threads = effective_threads(cfg);
  return a;
}

rhs_projection_options rhs_opts(const run_config& cfg) {
  rhs_projection_options r;
  r.time_order = cfg.quad_time_order;
  r.triangle_order = cfg.quad_triangle_order;
  r.stochastic_order = cfg.quad_stochastic_order;
  r.threads = effective_threads(cfg);
  return r;
}

pc_basis make_basis(const problem_spec& p, const run_config& cfg, int degree) {
  return pc_basis(multi_index_set(p.stochastic_dim, degree),
                  cfg.quad_stochastic_order > 0 ? cfg.quad_stochastic_order : 0);
}

assembled_problem assemble_all(const run_config& cfg, int degree_override = -1) {
  problem_spec p = resolve_problem(cfg);
  const int degree = degree_override >= 0 ? degree_override : p.degree;
  surface_mesh mesh = build_mesh(cfg, p);
  time_grid grid = cfl_timegrid(mesh, p.cfl, p.horizon, p.wave_speed);
  pc_basis basis = make_basis(p, cfg, degree);

  assembled_problem out{std::move(p), std::move(mesh), grid, basis, {}, {}, {}, {}, {}};
  const auto t0 = std::chrono::steady_clock::now();
  out.V = assemble_single_layer(out.mesh, out.grid, assembly_opts(cfg));
  if (out.problem.kind == problem_kind::acoustic_second_kind) {
    out.Kp = assemble_adjoint_double_layer(out.mesh, out.grid, assembly_opts(cfg));
    out.alpha = build_stochastic_alpha(out.problem, out.basis, out.mesh);
    out.mass = assemble_mass(out.mesh, [](const Eigen::Vector3d&) { return 1.0; });
  }
  out.t_assemble = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const bool dirichlet = out.problem.kind == problem_kind::dirichlet_single_layer;
  out.F = project_rhs(out.problem.rhs, out.problem.rhs_dt, out.basis, out.mesh, out.grid,
                      /*apply_time_derivative=*/dirichlet, rhs_opts(cfg));
  out.t_rhs = seconds_since(t1);
  return out;
}

stochastic_solution solve_assembled(const assembled_problem& ap, const run_config& cfg) {
  solve_options so{effective_threads(cfg)};
  if (ap.problem.kind == problem_kind::dirichlet_single_layer)
    return mot_dirichlet(ap.V, ap.F, ap.basis, ap.mesh, ap.grid, so);
  return mot_second_kind(ap.V, ap.Kp, ap.alpha, ap.mass, ap.F, ap.basis, ap.mesh, ap.grid, so);
}

Eigen::MatrixXd final_step_modes(const stochastic_solution& sol) {
  Eigen::MatrixXd modes(sol.coeff.n_modes, sol.coeff.n_elems);
  for (std::size_t i = 0; i < sol.coeff.n_modes; ++i)
    modes.row(i) = sol.coeff.slab(i, sol.coeff.n_steps - 1).transpose();
  return modes;
}

}  // namespace

problem_spec resolve_problem(const run_config& cfg) {
  problem_spec p = cfg.problem.rfind("file:", 0) == 0
                       ? parse_problem_file(cfg.problem.substr(5))
                       : builtin_problem(cfg.problem);
  if (cfg.cfl > 0) p.cfl = cfg.cfl;
  if (cfg.horizon > 0) p.horizon = cfg.horizon;
  if (cfg.wave_speed > 0) p.wave_speed = cfg.wave_speed;
  if (cfg.stochastic_dim > 0) p.stochastic_dim = cfg.stochastic_dim;
  if (cfg.degree >= 0) p.degree = cfg.degree;
  return p;
}

surface_mesh build_mesh(const run_config& cfg, const problem_spec& problem,
                        std::vector<std::string>* warnings) {
  const std::string& sel = cfg.mesh.empty() ? problem.default_mesh : cfg.mesh;
  if (sel == "icosphere") return gen_icosphere(cfg.level);
  if (sel == "cube") return gen_cube(cfg.level);
  if (sel.rfind("import:", 0) == 0) {
    const mesh_format fmt = cfg.mesh_format == "obj" ? mesh_format::obj : mesh_format::off;
    return import_mesh(sel.substr(7), fmt, cfg.flip_orientation, warnings);
  }
  throw config_error("config.mesh: unknown mesh source '" + sel + "'");
}

int cmd_mesh(const run_config& cfg, std::ostream& out) {
  const problem_spec p = resolve_problem(cfg);
  std::vector<std::string> warnings;
  const surface_mesh mesh = build_mesh(cfg, p, &warnings);
  const time_grid grid = cfl_timegrid(mesh, p.cfl, p.horizon, p.wave_speed);
  const fs::path dir = prepare_run_dir(cfg, "mesh");
  export_vtk((dir / "mesh.vtk").string(), mesh,
             {{"patch", Eigen::Map<const Eigen::VectorXi>(mesh.patch.data(),
                                                          mesh.patch.size())
                            .cast<double>()}});
  json summary{{"elements", mesh.n_elements()},
               {"vertices", mesh.vertices.size()},
               {"h", mesh.max_diameter()},
               {"surface_diameter", mesh.hull_diameter()},
               {"total_area", mesh.total_area()},
               {"closed", mesh.closed()},
               {"euler_characteristic", mesh.euler_characteristic()},
               {"time_steps", grid.n_steps},
               {"dt", grid.dt},
               {"requested_cfl", grid.requested_cfl},
               {"achieved_cfl", grid.achieved_cfl},
               {"warnings", warnings}};
  write_json(dir / "summary.json", summary);
  out << summary.dump(2) << "\n";
  return exit_ok;
}

int cmd_solve(const run_config& cfg, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  assembled_problem ap = assemble_all(cfg);
  const auto t1 = std::chrono::steady_clock::now();
  stochastic_solution sol = solve_assembled(ap, cfg);
  const double t_solve = seconds_since(t1);

  const fs::path dir = prepare_run_dir(cfg, "solve");
  sol.save((dir / "solution.stbs").string());

  const Eigen::MatrixXd modes = final_step_modes(sol);
  export_vtk((dir / "mean_variance.vtk").string(), ap.mesh,
             {{"mean", pc_mean(modes)}, {"variance", pc_variance(modes)}});

  json summary{{"problem", ap.problem.name},
               {"formulation", ap.problem.kind == problem_kind::dirichlet_single_layer
                                   ? "dirichlet-single-layer"
                                   : "acoustic-second-kind"},
               {"elements", ap.mesh.n_elements()},
               {"time_steps", ap.grid.n_steps},
               {"dt", ap.grid.dt},
               {"requested_cfl", ap.grid.requested_cfl},
               {"achieved_cfl", ap.grid.achieved_cfl},
               {"block_truncation", ap.V.truncation},
               {"stochastic_dim", ap.problem.stochastic_dim},
               {"degree", ap.basis.max_degree()},
               {"modes", ap.basis.n_modes()},
               {"quad", {{"stochastic_order", ap.basis.quad_order()},
                         {"time_order", cfg.quad_time_order},
                         {"triangle_order", cfg.quad_triangle_order},
                         {"outer_order", cfg.quad_outer_order},
                         {"touching_refine", cfg.touching_refine}}},
               {"threads", effective_threads(cfg)},
               {"seed", cfg.seed},
               {"timings", {{"assembly_s", ap.t_assemble},
                            {"rhs_s", ap.t_rhs},
                            {"solve_s", t_solve},
                            {"total_s", seconds_since(t0)}}}};
  if (ap.problem.kind == problem_kind::dirichlet_single_layer) {
    const double e = energy_functional(sol, ap.V, ap.F);
    const double eg = galerkin_energy(sol, ap.F);
    summary["energy"] = e;
    summary["galerkin_energy_residual"] = std::abs(e - eg) / std::max(std::abs(e), 1e-300);
  } else {
    summary["l2_space_time_norm"] = l2_space_time_norm(sol.coeff, ap.mesh, ap.grid);
    summary["note"] =
        "second-kind single-layer formulation; not comparable with mixed-system references";
  }
  write_json(dir / "summary.json", summary);
  out << summary.dump(2) << "\n";
  return exit_ok;
}

int cmd_convergence(const run_config& cfg, std::ostream& out) {
  if (cfg.sweep_max < cfg.sweep_min) throw config_error("convergence: empty sweep");
  const fs::path dir = prepare_run_dir(cfg, "convergence");
  const bool by_degree = cfg.sweep == "degrees";
  std::vector<convergence_record> records;
  std::vector<std::vector<double>> rows;
  json report;

  if (by_degree) {
    // One benchmark solve at high degree; same stochastic quadrature order for
    // every point of the sweep so that truncations are comparable.
    const int jb = cfg.benchmark_degree > 0 ? cfg.benchmark_degree : cfg.sweep_max + 4;
    run_config bench_cfg = cfg;
    if (bench_cfg.quad_stochastic_order == 0)
      bench_cfg.quad_stochastic_order = 2 * jb + 4;
    assembled_problem ap = assemble_all(bench_cfg, jb);
    stochastic_solution bench = solve_assembled(ap, bench_cfg);
    const bool dirichlet = ap.problem.kind == problem_kind::dirichlet_single_layer;
    const double ref = dirichlet ? energy_functional(bench, ap.V, ap.F)
                                 : l2_space_time_norm(bench.coeff, ap.mesh, ap.grid);

    for (int j = cfg.sweep_min; j <= cfg.sweep_max; ++j) {
      try {
        run_config point_cfg = bench_cfg;
        pc_basis basis = make_basis(ap.problem, point_cfg, j);
        mode_tensor F = project_rhs(ap.problem.rhs, ap.problem.rhs_dt, basis, ap.mesh,
                                    ap.grid, dirichlet, rhs_opts(point_cfg));
        stochastic_solution sol =
            dirichlet
                ? mot_dirichlet(ap.V, F, basis, ap.mesh, ap.grid,
                                {effective_threads(point_cfg)})
                : mot_second_kind(ap.V, ap.Kp, build_stochastic_alpha(ap.problem, basis, ap.mesh),
                                  ap.mass, F, basis, ap.mesh, ap.grid,
                                  {effective_threads(point_cfg)});
        const double val = dirichlet ? energy_functional(sol, ap.V, F)
                                     : l2_space_time_norm(sol.coeff, ap.mesh, ap.grid);
        const double err = std::abs(val - ref) / std::max(std::abs(ref), 1e-300);
        records.push_back({"J=" + std::to_string(j), static_cast<double>(j + 1), err,
                           cfg.level, ap.grid.achieved_cfl});
        rows.push_back({static_cast<double>(j), err, val});
        out << "degree " << j << ": relative error " << err << "\n";
      } catch (const std::exception& e) {
        out << "degree " << j << ": FAILED: " << e.what() << "\n";
        rows.push_back({static_cast<double>(j), std::nan(""), std::nan("")});
      }
    }
    export_csv((dir / "convergence.csv").string(), {"degree", "relative_error", "value"}, rows);
    report["benchmark_degree"] = jb;
    report["benchmark_value"] = ref;
    // Spectral decay shows as a straight line of log(error) against the
    // degree; report that slope.
    if (records.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& r : records) {
        const double x = r.abscissa - 1.0, y = std::log(std::max(r.error, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double n = static_cast<double>(records.size());
      report["log_error_per_degree_slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
  } else {
    const int degree = cfg.degree >= 0 ? cfg.degree : 4;
    std::vector<std::pair<double, double>> energies;
    for (int level = cfg.sweep_min; level <= cfg.sweep_max; ++level) {
      try {
        run_config point_cfg = cfg;
        point_cfg.level = std::max(level, 1);
        assembled_problem ap = assemble_all(point_cfg, degree);
        stochastic_solution sol = solve_assembled(ap, point_cfg);
        const bool dirichlet = ap.problem.kind == problem_kind::dirichlet_single_layer;
        const double val = dirichlet ? energy_functional(sol, ap.V, ap.F)
                                     : l2_space_time_norm(sol.coeff, ap.mesh, ap.grid);
        const double dof = static_cast<double>(ap.mesh.n_elements()) * ap.grid.n_steps;
        energies.emplace_back(dof, val);
        rows.push_back({static_cast<double>(level), dof, val});
        out << "level " << level << ": dof " << dof << ", value " << val << "\n";
      } catch (const std::exception& e) {
        out << "level " << level << ": FAILED: " << e.what() << "\n";
      }
    }
    if (energies.size() < 3)
      throw std::runtime_error("convergence: need at least three successful levels");
    const richardson_result rr = richardson_extrapolate(energies);
    for (std::size_t k = 0; k < energies.size(); ++k) {
      const double err =
          std::abs(energies[k].second - rr.limit) / std::max(std::abs(rr.limit), 1e-300);
      records.push_back({"level", energies[k].first, err, static_cast<int>(k), 0.0});
      rows[k].push_back(err);
    }
    export_csv((dir / "convergence.csv").string(),
               {"level", "space_time_dof", "value", "relative_error"}, rows);
    report["extrapolated_value"] = rr.limit;
    report["extrapolation_rate"] = rr.rate;
    report["fitted_slope"] = fit_rate(records);
    out << "fitted slope: " << report["fitted_slope"].get<double>() << "\n";
  }
  write_json(dir / "report.json", report);
  out << "report written to " << (dir / "report.json").string() << "\n";
  return exit_ok;
}

int cmd_postprocess(const run_config& cfg, const std::string& solution_path,
                    const std::vector<Eigen::Vector3d>& points, bool with_spectrum,
                    std::ostream& out) {
  if (points.empty()) throw config_error("postprocess: no field points given");
  const stochastic_solution sol = stochastic_solution::load(solution_path);
  const problem_spec p = resolve_problem(cfg);
  const surface_mesh mesh = build_mesh(cfg, p);
  if (mesh.content_hash() != sol.mesh_hash)
    throw std::runtime_error(
        "postprocess: solution container was computed on a different mesh");

  std::vector<double> times(sol.coeff.n_steps);
  for (std::size_t m = 0; m < times.size(); ++m) times[m] = (m + 1) * sol.dt;

  const std::vector<Eigen::MatrixXd> per_mode =
      eval_single_layer_potential(sol, mesh, points, times);

  const fs::path dir = prepare_run_dir(cfg, "postprocess");
  std::vector<std::vector<double>> mode_rows, summary_rows, spec_rows;
  for (std::size_t pt = 0; pt < points.size(); ++pt) {
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
      for (std::size_t i = 0; i < per_mode.size(); ++i)
        mode_rows.push_back({times[ti], static_cast<double>(pt), static_cast<double>(i),
                             per_mode[i](ti, pt)});
      double mean = per_mode[0](ti, pt), var = 0.0;
      for (std::size_t i = 1; i < per_mode.size(); ++i)
        var += per_mode[i](ti, pt) * per_mode[i](ti, pt);
      summary_rows.push_back({times[ti], static_cast<double>(pt), mean, std::sqrt(var)});
    }
    if (with_spectrum) {
      std::vector<double> mean_series(times.size());
      for (std::size_t ti = 0; ti < times.size(); ++ti) mean_series[ti] = per_mode[0](ti, pt);
      const spectrum sp = fft_spl_a_weighted(mean_series, sol.dt);
      for (std::size_t k = 0; k < sp.frequency.size(); ++k)
        spec_rows.push_back({static_cast<double>(pt), sp.frequency[k], sp.spl_db[k],
                             sp.spl_dba[k]});
    }
  }
  export_csv((dir / "pressure_modes.csv").string(), {"time", "point", "mode", "pressure"},
             mode_rows);
  export_csv((dir / "pressure_summary.csv").string(), {"time", "point", "mean", "std"},
             summary_rows);
  if (with_spectrum)
    export_csv((dir / "spl_dba.csv").string(), {"point", "frequency_hz", "spl_db", "spl_dba"},
               spec_rows);
  out << "postprocess: wrote " << (with_spectrum ? 3 : 2) << " csv files to " << dir.string()
      << "\n";
  return exit_ok;
}

namespace {

struct check_reporter {
  std::ostream& out;
  bool all_ok = true;
  void operator()(const std::string& name, bool ok, double residual, double tol) {
    out << (ok ? "[PASS] " : "[FAIL] ") << name << " (residual " << residual << ", tolerance "
        << tol << ")\n";
    all_ok = all_ok && ok;
  }
};

}  // namespace

int cmd_validate(const run_config& cfg, std::ostream& out) {
  check_reporter check{out};
  const int threads = effective_threads(cfg);

  // Stochastic basis checks.
  {
    double worst = 0.0;
    for (int n : {1, 2}) {
      pc_basis basis(multi_index_set(n, n == 1 ? 8 : 4));
      const Eigen::MatrixXd S = basis.gram_matrix([](std::span<const double>) { return 1.0; });
      worst = std::max(worst,
                       (S - Eigen::MatrixXd::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff());
    }
    check("orthonormality S(1) = I", worst < 1e-12, worst, 1e-12);

    pc_basis basis(multi_index_set(1, 4));
    const Eigen::MatrixXd S = basis.gram_matrix(
        [](std::span<const double> xi) { return 1.0 / (2.0 + xi[0]); });
    const double sym = (S - S.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double mineig = es.eigenvalues().minCoeff();
    check("gram matrix symmetric", sym == 0.0, sym, 0.0);
    check("gram matrix positive definite for positive weight", mineig > 0.0, mineig, 0.0);
  }

  // Kernel checks on the level-1 sphere.
  {
    const surface_mesh mesh = gen_icosphere(1);
    const time_grid grid = cfl_timegrid(mesh, 0.605, 2.0);
    assembly_options opts;
    opts.threads = threads;
    toeplitz_blocks V = assemble_single_layer(mesh, grid, opts);
    if (cfg.inject_v_perturbation && V.blocks[0].nonZeros() > 0)
      V.blocks[0].valuePtr()[0] += 1e-3 * V.block_max_norm(0);

    const double tel = V.sum_max_norm() / V.block_max_norm(0);
    check("single layer telescoping", tel < 1e-8, tel, 1e-8);

    double asym = 0.0;
    for (int j = 0; j <= V.truncation; ++j)
      if (V.has_block(j))
        asym = std::max(asym, (V.dense_block(j) - V.dense_block(j).transpose())
                                  .cwiseAbs()
                                  .maxCoeff());
    check("single layer block symmetry", asym < 1e-12, asym, 1e-12);

    // Causality: no block entries outside the pairwise distance cone.
    const double dtc = grid.wave_speed * grid.dt;
    bool cone_ok = true;
    for (int j = 0; j <= V.truncation && cone_ok; ++j) {
      if (!V.has_block(j)) continue;
      for (int k = 0; k < V.blocks[j].outerSize() && cone_ok; ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(V.blocks[j], k); it; ++it) {
          const std::size_t r = it.row(), s = it.col();
          const double dmin = triangle_min_distance(
              mesh.vertex_of(r, 0), mesh.vertex_of(r, 1), mesh.vertex_of(r, 2),
              mesh.vertex_of(s, 0), mesh.vertex_of(s, 1), mesh.vertex_of(s, 2));
          const double dmax = triangle_max_distance(
              mesh.vertex_of(r, 0), mesh.vertex_of(r, 1), mesh.vertex_of(r, 2),
              mesh.vertex_of(s, 0), mesh.vertex_of(s, 1), mesh.vertex_of(s, 2));
          if ((j - 1) * dtc > dmax || (j + 1) * dtc < dmin) {
            cone_ok = false;
            break;
          }
        }
    }
    check("single layer causality cone", cone_ok, cone_ok ? 0.0 : 1.0, 0.0);

    // MOT against the dense block lower-triangular solve, one mode.
    pc_basis basis(multi_index_set(1, 0));
    const problem_spec p = builtin_problem("dirichlet-sphere");
    auto f1 = [&p](double t, const Eigen::Vector3d& x, std::span<const double>) {
      const double xi3[3] = {0.3, -0.2, 0.5};
      return p.rhs(t, x, xi3);
    };
    auto f1dt = [&p](double t, const Eigen::Vector3d& x, std::span<const double>) {
      const double xi3[3] = {0.3, -0.2, 0.5};
      return p.rhs_dt(t, x, xi3);
    };
    rhs_projection_options ro;
    ro.threads = threads;
    const mode_tensor F = project_rhs(f1, f1dt, basis, mesh, grid, true, ro);
    const stochastic_solution sol = mot_dirichlet(V, F, basis, mesh, grid, {threads});

    const std::size_t ne = mesh.n_elements(), ns = grid.n_steps;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(ne * ns, ne * ns);
    for (std::size_t l = 0; l < ns; ++l)
      for (std::size_t m = 0; m <= l; ++m)
        dense.block(l * ne, m * ne, ne, ne) = V.dense_block(static_cast<int>(l - m));
    Eigen::VectorXd rhs(ne * ns);
    for (std::size_t l = 0; l < ns; ++l) rhs.segment(l * ne, ne) = F.slab(0, l);
    const Eigen::VectorXd x = dense.partialPivLu().solve(rhs);
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < ns; ++l) {
      num = std::max(num, (x.segment(l * ne, ne) - sol.coeff.slab(0, l)).cwiseAbs().maxCoeff());
      den = std::max(den, sol.coeff.slab(0, l).cwiseAbs().maxCoeff());
    }
    const double motrel = num / std::max(den, 1e-300);
    check("MOT equals dense space-time solve", motrel < 1e-10, motrel, 1e-10);

    // Causality of solutions: delayed data leaves early steps empty.
    auto fdel = [](double t, const Eigen::Vector3d&, std::span<const double>) {
      const double tau = t - 1.0;
      return tau > 0 ? tau * tau : 0.0;
    };
    const mode_tensor Fd = project_rhs(fdel, nullptr, basis, mesh, grid, true, ro);
    const stochastic_solution sold = mot_dirichlet(V, Fd, basis, mesh, grid, {threads});
    double early = 0.0;
    const std::size_t first_active = static_cast<std::size_t>(std::floor(1.0 / grid.dt));
    for (std::size_t l = 0; l + 1 < first_active; ++l)
      early = std::max(early, sold.coeff.slab(0, l).cwiseAbs().maxCoeff());
    check("solution causality", early < 1e-12, early, 1e-12);

    const double e = energy_functional(sol, V, F);
    const double eg = galerkin_energy(sol, F);
    const double erel = std::abs(e - eg) / std::max(std::abs(e), 1e-300);
    check("Galerkin energy identity", erel < 1e-10, erel, 1e-10);
  }

  // Adjoint double layer checks on the level-1 cube.
  {
    const surface_mesh mesh = gen_cube(1);
    const time_grid grid = cfl_timegrid(mesh, 0.387, 3.0);
    assembly_options opts;
    opts.threads = threads;
    const toeplitz_blocks Kp = assemble_adjoint_double_layer(mesh, grid, opts);

    double coplanar = 0.0;
    for (int j = 0; j <= Kp.truncation; ++j) {
      if (!Kp.has_block(j)) continue;
      for (int k = 0; k < Kp.blocks[j].outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Kp.blocks[j], k); it; ++it) {
          const std::size_t r = it.row(), s = it.col();
          if (mesh.normals[r].cross(mesh.normals[s]).norm() < 1e-12 &&
              std::abs((mesh.centroids[r] - mesh.centroids[s]).dot(mesh.normals[s])) < 1e-12)
            coplanar = std::max(coplanar, std::abs(it.value()));
        }
    }
    check("coplanar adjoint double layer entries vanish", coplanar == 0.0, coplanar, 0.0);

    // Sum of retarded blocks equals dt times the static operator.
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(Kp.n_rows, Kp.n_cols);
    for (int j = 0; j <= Kp.truncation; ++j)
      if (Kp.has_block(j)) sum += Kp.dense_block(j);
    Eigen::MatrixXd stat = Eigen::MatrixXd::Zero(Kp.n_rows, Kp.n_cols);
    {
      const triangle_rule& rule = triangle_gauss(cfg.quad_outer_order);
      for (std::size_t r = 0; r < mesh.n_elements(); ++r)
        for (std::size_t s = 0; s < mesh.n_elements(); ++s) {
          if (mesh.normals[r].cross(mesh.normals[s]).norm() < 1e-12 &&
              std::abs((mesh.centroids[r] - mesh.centroids[s]).dot(mesh.normals[s])) < 1e-12)
            continue;
          double acc = 0.0;
          const Eigen::Vector3d a = mesh.vertex_of(r, 0), b = mesh.vertex_of(r, 1),
                                c = mesh.vertex_of(r, 2);
          for (std::size_t k = 0; k < rule.w.size(); ++k) {
            const Eigen::Vector3d xq = a + rule.a[k] * (b - a) + rule.b[k] * (c - a);
            acc -= mesh.areas[r] * rule.w[k] *
                   shell_restricted_integral(radial_kernel::adjoint_double_layer, xq,
                                             mesh.normals[r], mesh.vertex_of(s, 0),
                                             mesh.vertex_of(s, 1), mesh.vertex_of(s, 2), 0.0,
                                             mesh.hull_diameter() + 1.0);
          }
          stat(r, s) = acc;
        }
    }
    const double krel = (sum - grid.dt * stat).cwiseAbs().maxCoeff() /
                        std::max(stat.cwiseAbs().maxCoeff() * grid.dt, 1e-300);
    check("adjoint double layer telescoping to static operator", krel < 1e-8, krel, 1e-8);
  }

  // Monte Carlo reproducibility.
  {
    auto solve = [](std::span<const double> xi) {
      Eigen::MatrixXd f(2, 2);
      f << xi[0], xi[0] * xi[0], 1.0 + xi[0], 0.5 * xi[0] - 1.0;
      return f;
    };
    const mc_statistics a = mc_reference_solve(1, 500, cfg.seed, solve, threads);
    const mc_statistics b = mc_reference_solve(1, 500, cfg.seed, solve, 1);
    const double diff = (a.mean - b.mean).cwiseAbs().maxCoeff() +
                        (a.variance - b.variance).cwiseAbs().maxCoeff();
    check("Monte Carlo seed reproducibility", diff == 0.0, diff, 0.0);
  }

  out << (check.all_ok ? "validate: all checks passed\n" : "validate: FAILURES detected\n");
  return check.all_ok ? exit_ok : exit_validation;
}

}  // namespace stbem
