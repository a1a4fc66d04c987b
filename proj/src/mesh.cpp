#include "stbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace stbem {

namespace {

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

void surface_mesh::finalize() {
  const std::size_t n = triangles.size();
  normals.resize(n);
  areas.resize(n);
  diameters.resize(n);
  centroids.resize(n);
  if (patch.empty()) patch.assign(n, 0);
  if (patch_names.empty()) patch_names = {"all"};
  if (patch.size() != n) throw std::runtime_error("mesh: patch labels do not cover elements");

  for (std::size_t e = 0; e < n; ++e) {
    const Eigen::Vector3d a = vertex_of(e, 0);
    const Eigen::Vector3d b = vertex_of(e, 1);
    const Eigen::Vector3d c = vertex_of(e, 2);
    Eigen::Vector3d nv = (b - a).cross(c - a);
    double nn = nv.norm();
    if (!(nn > 0.0))
      throw std::runtime_error("mesh: degenerate element " + std::to_string(e));
    areas[e] = 0.5 * nn;
    normals[e] = nv / nn;
    diameters[e] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    centroids[e] = (a + b + c) / 3.0;
  }

  hull_diameter_ = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      hull_diameter_ = std::max(hull_diameter_, (vertices[i] - vertices[j]).norm());
}

double surface_mesh::max_diameter() const {
  double h = 0.0;
  for (double d : diameters) h = std::max(h, d);
  return h;
}

double surface_mesh::total_area() const {
  double a = 0.0;
  for (double x : areas) a += x;
  return a;
}

int surface_mesh::euler_characteristic() const {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) {
      int i = t[k], j = t[(k + 1) % 3];
      edges[{std::min(i, j), std::max(i, j)}]++;
    }
  return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
         static_cast<int>(triangles.size());
}

bool surface_mesh::closed() const {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) {
      int i = t[k], j = t[(k + 1) % 3];
      edges[{std::min(i, j), std::max(i, j)}]++;
    }
  for (const auto& [e, c] : edges)
    if (c != 2) return false;
  return true;
}

std::uint64_t surface_mesh::content_hash() const {
  // FNV-1a over vertex coordinates and connectivity.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& v : vertices) {
    double c[3] = {v.x(), v.y(), v.z()};
    mix(c, sizeof(c));
  }
  for (const auto& t : triangles) {
    std::int32_t c[3] = {t[0], t[1], t[2]};
    mix(c, sizeof(c));
  }
  return h;
}

surface_mesh gen_icosphere(int level) {
  if (level < 1) throw std::invalid_argument("gen_icosphere: level must be >= 1");
  if (level > 8) throw std::runtime_error("gen_icosphere: level beyond memory budget");

  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      auto key = std::make_pair(std::min(i, j), std::max(i, j));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d m = (verts[i] + verts[j]).normalized();
      verts.push_back(m);
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({ab, f[1], bc});
      next.push_back({ca, bc, f[2]});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  surface_mesh mesh;
  mesh.vertices = std::move(verts);
  mesh.triangles = std::move(faces);
  mesh.patch_names = {"sphere"};
  mesh.patch.assign(mesh.triangles.size(), 0);
  mesh.finalize();
  // Outward orientation: centroids point away from the origin.
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    if (mesh.normals[e].dot(mesh.centroids[e]) < 0.0) {
      std::swap(mesh.triangles[e][1], mesh.triangles[e][2]);
    }
  mesh.finalize();
  return mesh;
}

surface_mesh gen_cube(int level) {
  if (level < 1) throw std::invalid_argument("gen_cube: level must be >= 1");
  if (level > 8) throw std::runtime_error("gen_cube: level beyond memory budget");

  const int k = 1 << level;  // grid cells per face edge
  surface_mesh mesh;
  std::map<std::array<long, 3>, int> vertex_index;
  auto vid = [&](double x, double y, double z) {
    // Grid coordinates are multiples of 2/k; key on integer lattice.
    std::array<long, 3> key = {std::lround(x * k), std::lround(y * k), std::lround(z * k)};
    auto it = vertex_index.find(key);
    if (it != vertex_index.end()) return it->second;
    mesh.vertices.emplace_back(x, y, z);
    int idx = static_cast<int>(mesh.vertices.size()) - 1;
    vertex_index.emplace(key, idx);
    return idx;
  };

  struct face {
    Eigen::Vector3d origin, du, dv;  // outward = du x dv
  };
  const double s = 2.0 / k;
  const std::vector<face> faces = {
      {{-1, -1, 1}, {s, 0, 0}, {0, s, 0}},   // z = +1 (top)
      {{-1, 1, -1}, {s, 0, 0}, {0, -s, 0}},  // z = -1
      {{-1, -1, -1}, {0, s, 0}, {0, 0, s}},  // x = -1
      {{1, -1, -1}, {0, 0, s}, {0, s, 0}},   // x = +1
      {{-1, -1, -1}, {0, 0, s}, {s, 0, 0}},  // y = -1
      {{-1, 1, -1}, {s, 0, 0}, {0, 0, s}},   // y = +1
  };

  for (const auto& f : faces) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Eigen::Vector3d p00 = f.origin + i * f.du + j * f.dv;
        Eigen::Vector3d p10 = p00 + f.du;
        Eigen::Vector3d p01 = p00 + f.dv;
        Eigen::Vector3d p11 = p00 + f.du + f.dv;
        int a = vid(p00.x(), p00.y(), p00.z());
        int b = vid(p10.x(), p10.y(), p10.z());
        int c = vid(p11.x(), p11.y(), p11.z());
        int d = vid(p01.x(), p01.y(), p01.z());
        mesh.triangles.push_back({a, b, c});
        mesh.triangles.push_back({a, c, d});
      }
  }

  mesh.patch_names = {"top", "side"};
  mesh.patch.resize(mesh.triangles.size());
  mesh.finalize();
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    mesh.patch[e] = (mesh.centroids[e].z() > 1.0 - 1e-9) ? 0 : 1;

  // Enforce outward orientation face by face.
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Vector3d c = mesh.centroids[e];
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    int axis;
    c.cwiseAbs().maxCoeff(&axis);
    out[axis] = c[axis] > 0 ? 1.0 : -1.0;
    if (mesh.normals[e].dot(out) < 0.0) std::swap(mesh.triangles[e][1], mesh.triangles[e][2]);
  }
  mesh.finalize();
  return mesh;
}

namespace {

surface_mesh build_imported(std::vector<Eigen::Vector3d> verts,
                            std::vector<std::vector<int>> polys, bool flip,
                            std::vector<std::string>* warnings) {
  surface_mesh mesh;
  mesh.vertices = std::move(verts);
  for (std::size_t p = 0; p < polys.size(); ++p) {
    const auto& poly = polys[p];
    if (poly.size() < 3)
      throw std::runtime_error("import_mesh: face " + std::to_string(p) + " has < 3 vertices");
    for (int v : poly)
      if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
        throw std::runtime_error("import_mesh: face " + std::to_string(p) +
                                 " references invalid vertex");
    for (std::size_t t = 1; t + 1 < poly.size(); ++t)
      mesh.triangles.push_back({poly[0], poly[t], poly[t + 1]});
  }
  if (flip)
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);

  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    if (triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= 0.0)
      throw std::runtime_error("import_mesh: degenerate (zero-area) element " +
                               std::to_string(e));
  }
  mesh.finalize();

  if (warnings) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k) {
        int i = t[k], j = t[(k + 1) % 3];
        edges[{std::min(i, j), std::max(i, j)}]++;
      }
    int open = 0, over = 0;
    for (const auto& [e, c] : edges) {
      if (c == 1) ++open;
      if (c > 2) ++over;
    }
    if (open > 0)
      warnings->push_back("mesh has " + std::to_string(open) + " boundary edges (open surface)");
    if (over > 0)
      warnings->push_back("mesh has " + std::to_string(over) + " non-manifold edges");
  }
  return mesh;
}

}  // namespace

surface_mesh import_mesh(const std::string& path, mesh_format format, bool flip_orientation,
                         std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_mesh: cannot open " + path);

  std::vector<Eigen::Vector3d> verts;
  std::vector<std::vector<int>> polys;
  int line_no = 0;
  std::string line;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("import_mesh: " + path + ":" + std::to_string(line_no) + ": " + what);
  };

  if (format == mesh_format::off) {
    auto next_tokens = [&]() -> std::istringstream {
      while (std::getline(in, line)) {
        ++line_no;
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        std::string probe;
        if (ss >> probe) {
          return std::istringstream(line);
        }
      }
      fail("unexpected end of file");
      return std::istringstream("");
    };
    auto header = next_tokens();
    std::string magic;
    header >> magic;
    if (magic != "OFF") fail("missing OFF header");
    std::size_t nv = 0, nf = 0, ne = 0;
    auto counts = next_tokens();
    if (!(counts >> nv >> nf >> ne)) fail("malformed counts line");
    verts.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      auto ss = next_tokens();
      double x, y, z;
      if (!(ss >> x >> y >> z)) fail("malformed vertex");
      verts.emplace_back(x, y, z);
    }
    for (std::size_t f = 0; f < nf; ++f) {
      auto ss = next_tokens();
      int cnt;
      if (!(ss >> cnt) || cnt < 3) fail("malformed face");
      std::vector<int> poly(cnt);
      for (int k = 0; k < cnt; ++k)
        if (!(ss >> poly[k])) fail("malformed face index");
      polys.push_back(std::move(poly));
    }
  } else {
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ss(line);
      std::string tag;
      if (!(ss >> tag)) continue;
      if (tag == "v") {
        double x, y, z;
        if (!(ss >> x >> y >> z)) fail("malformed vertex");
        verts.emplace_back(x, y, z);
      } else if (tag == "f") {
        std::vector<int> poly;
        std::string tok;
        while (ss >> tok) {
          // Accept v, v/vt, v/vt/vn, v//vn.
          std::size_t slash = tok.find('/');
          int idx = 0;
          try {
            idx = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
          } catch (...) {
            fail("malformed face token '" + tok + "'");
          }
          if (idx < 0) idx = static_cast<int>(verts.size()) + idx + 1;
          poly.push_back(idx - 1);
        }
        if (poly.size() < 3) fail("face with < 3 vertices");
        polys.push_back(std::move(poly));
      }
    }
  }
  return build_imported(std::move(verts), std::move(polys), flip_orientation, warnings);
}

time_grid cfl_timegrid(const surface_mesh& mesh, double cfl, double horizon, double wave_speed) {
  if (!(cfl > 0.0)) throw std::invalid_argument("cfl_timegrid: cfl must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("cfl_timegrid: horizon must be > 0");
  if (!(wave_speed > 0.0)) throw std::invalid_argument("cfl_timegrid: wave speed must be > 0");
  const double h = mesh.max_diameter();
  if (!(h > 0.0)) throw std::invalid_argument("cfl_timegrid: mesh has no elements");

  const double dt0 = cfl * h / wave_speed;
  const long n = std::lround(horizon / dt0);
  if (n < 1)
    throw std::invalid_argument("cfl_timegrid: horizon shorter than one time step");

  time_grid g;
  g.n_steps = static_cast<int>(n);
  g.dt = horizon / static_cast<double>(n);
  g.horizon = horizon;
  g.wave_speed = wave_speed;
  g.requested_cfl = cfl;
  g.achieved_cfl = wave_speed * g.dt / h;
  return g;
}

}  // namespace stbem
