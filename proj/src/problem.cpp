#include "stbem/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace stbem {

namespace {

// Dirichlet data of the sphere benchmark: a plane-wave train with stochastic
// amplitude and phase, k = (0.2, 0.2, 0.2).
constexpr double kx = 0.2, ky = 0.2, kz = 0.2;
const double knorm = std::sqrt(kx * kx + ky * ky + kz * kz);

double sphere_wave(double t, const Eigen::Vector3d& x, std::span<const double> xi) {
  if (t <= 1e-6) return 0.0;  // exp(-1/(10 t^2)) underflows far before this
  const double phase = knorm * t - (kx * x.x() + ky * x.y() + kz * x.z());
  const double amp = std::exp(xi[0] - 1.0 / (10.0 * t * t));
  return amp * (std::cos(xi[1] + xi[2]) * std::cos(phase) +
                std::sin(xi[1] + xi[2]) * std::sin(phase));
}

double sphere_wave_dt(double t, const Eigen::Vector3d& x, std::span<const double> xi) {
  if (t <= 1e-6) return 0.0;
  const double phase = knorm * t - (kx * x.x() + ky * x.y() + kz * x.z());
  const double amp = std::exp(xi[0] - 1.0 / (10.0 * t * t));
  const double c = std::cos(phase - (xi[1] + xi[2]));
  const double s = std::sin(phase - (xi[1] + xi[2]));
  // d/dt amp = amp / (5 t^3); d/dt cos(phase - ...) = -|k| sin(...).
  return amp * (c / (5.0 * t * t * t) - knorm * s);
}

// Deterministic radial pulse driving the cube benchmark; supported on the
// moving band | ||x|| - t | < 0.9.
double cube_pulse(double t, const Eigen::Vector3d& x, std::span<const double>) {
  const double rn = x.norm();
  if (rn <= 0.0) return 0.0;
  if (std::abs(rn - t) >= 0.9) return 0.0;
  const double u = M_PI * (rn - t) / 0.9;
  const double cu = 1.0 + std::cos(u);
  const double su = std::sin(u);
  // Outward normal of the cube face through x.
  int axis;
  x.cwiseAbs().maxCoeff(&axis);
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[axis] = x[axis] > 0 ? 1.0 : -1.0;
  const double xn = x.dot(n);

  const double term1 = (2.0 * M_PI * (t * rn - rn * rn) * su + 0.9 * t * cu) * cu /
                       (1.8 * rn * rn * rn) * xn;
  const double term2 =
      -(cu * 2.0 * M_PI * (t - rn) * (-su) - 0.9 * cu) / (1.8 * rn);
  return term1 + term2;
}

}  // namespace

space_time_xi_fn named_rhs(const std::string& name) {
  if (name == "sphere-wave") return sphere_wave;
  if (name == "cube-pulse") return cube_pulse;
  if (name == "zero") return [](double, const Eigen::Vector3d&, std::span<const double>) {
    return 0.0;
  };
  throw std::invalid_argument("named_rhs: unknown right-hand side '" + name + "'");
}

space_time_xi_fn named_rhs_dt(const std::string& name) {
  if (name == "sphere-wave") return sphere_wave_dt;
  return nullptr;
}

problem_spec builtin_problem(const std::string& name) {
  problem_spec p;
  p.name = name;
  if (name == "dirichlet-sphere") {
    p.kind = problem_kind::dirichlet_single_layer;
    p.rhs = sphere_wave;
    p.rhs_dt = sphere_wave_dt;
    p.stochastic_dim = 3;
    p.degree = 2;
    p.cfl = 0.605;
    p.horizon = 2.0;
    p.default_mesh = "icosphere";
    return p;
  }
  if (name == "acoustic-cube-2ndkind") {
    p.kind = problem_kind::acoustic_second_kind;
    p.rhs = cube_pulse;
    p.alpha = {{"", 1.0, 0.9, 0}};  // U(0.1, 1.9)
    p.stochastic_dim = 1;
    p.degree = 2;
    p.cfl = 0.387;
    p.horizon = 3.0;
    p.default_mesh = "cube";
    return p;
  }
  if (name == "acoustic-cube-2ndkind-patch") {
    p.kind = problem_kind::acoustic_second_kind;
    p.rhs = cube_pulse;
    p.alpha = {{"top", 2.0, 0.5, 0},   // U(1.5, 2.5)
               {"side", 3.5, 0.5, 1}}; // U(3, 4)
    p.stochastic_dim = 2;
    p.degree = 2;
    p.cfl = 0.387;
    p.horizon = 3.0;
    p.default_mesh = "cube";
    return p;
  }
  throw std::invalid_argument("builtin_problem: unknown problem '" + name + "'");
}

std::vector<std::string> builtin_problem_names() {
  return {"dirichlet-sphere", "acoustic-cube-2ndkind", "acoustic-cube-2ndkind-patch"};
}

namespace {

std::vector<int> alpha_patch_map(const problem_spec& spec, const surface_mesh& mesh) {
  std::vector<int> map(mesh.n_elements(), -1);
  for (std::size_t a = 0; a < spec.alpha.size(); ++a) {
    const auto& ap = spec.alpha[a];
    if (ap.component < 0 || ap.component >= spec.stochastic_dim)
      throw std::invalid_argument("alpha: stochastic component out of range");
    if (!(ap.offset - std::abs(ap.scale) > 0.0))
      throw std::invalid_argument("alpha: lower bound must be positive on patch '" +
                                  ap.patch_name + "'");
    if (ap.patch_name.empty()) {
      for (auto& m : map)
        if (m == -1) m = static_cast<int>(a);
      continue;
    }
    int patch_id = -1;
    for (std::size_t pnames = 0; pnames < mesh.patch_names.size(); ++pnames)
      if (mesh.patch_names[pnames] == ap.patch_name) patch_id = static_cast<int>(pnames);
    if (patch_id < 0)
      throw std::invalid_argument("alpha: mesh has no patch named '" + ap.patch_name + "'");
    for (std::size_t e = 0; e < mesh.n_elements(); ++e)
      if (mesh.patch[e] == patch_id) {
        if (map[e] != -1)
          throw std::invalid_argument("alpha: element covered by two patch specs");
        map[e] = static_cast<int>(a);
      }
  }
  for (std::size_t e = 0; e < map.size(); ++e)
    if (map[e] == -1)
      throw std::invalid_argument("alpha: element " + std::to_string(e) +
                                  " not covered by any patch spec");
  return map;
}

}  // namespace

stochastic_alpha build_stochastic_alpha(const problem_spec& spec, const pc_basis& basis,
                                        const surface_mesh& mesh) {
  if (spec.alpha.empty())
    throw std::invalid_argument("build_stochastic_alpha: problem has no alpha specification");
  stochastic_alpha out;
  out.patch_of_elem = alpha_patch_map(spec, mesh);
  out.S.reserve(spec.alpha.size());
  for (const auto& ap : spec.alpha) {
    out.S.push_back(basis.gram_matrix([&ap](std::span<const double> xi) {
      return ap.offset + ap.scale * xi[ap.component];
    }));
  }
  return out;
}

Eigen::VectorXd alpha_at_sample(const problem_spec& spec, const surface_mesh& mesh,
                                std::span<const double> xi) {
  const std::vector<int> map = alpha_patch_map(spec, mesh);
  Eigen::VectorXd a(mesh.n_elements());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const auto& ap = spec.alpha[map[e]];
    a[e] = ap.offset + ap.scale * xi[ap.component];
  }
  return a;
}

}  // namespace stbem
