#ifndef STBEM_MESH_HPP
#define STBEM_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace stbem {

/// Triangulated surface with per-element geometry caches. Immutable after
/// finalize(); concurrent reads are safe.
struct surface_mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  // Derived per element by finalize().
  std::vector<Eigen::Vector3d> normals;    // unit, orientation from vertex order
  std::vector<double> areas;
  std::vector<double> diameters;           // longest edge
  std::vector<Eigen::Vector3d> centroids;

  std::vector<int> patch;                  // patch id per element
  std::vector<std::string> patch_names;

  std::size_t n_elements() const { return triangles.size(); }
  Eigen::Vector3d vertex_of(std::size_t elem, int corner) const {
    return vertices[triangles[elem][corner]];
  }

  double max_diameter() const;             // h
  double total_area() const;
  /// Max pairwise vertex distance; exact, cached after first call via finalize().
  double hull_diameter() const { return hull_diameter_; }
  int euler_characteristic() const;
  bool closed() const;                     // every edge shared by exactly two elements
  std::uint64_t content_hash() const;

  /// Computes derived arrays and validates (positive areas, unit normals).
  /// Throws std::runtime_error naming the offending element.
  void finalize();

 private:
  double hull_diameter_ = 0.0;
};

/// Subdivided icosahedron projected to the unit sphere; 20*4^level elements.
surface_mesh gen_icosphere(int level);

/// Structured triangulation of the cube surface [-1,1]^3 with 12*4^level
/// elements. Elements on x3 = 1 carry patch "top", the rest "side".
surface_mesh gen_cube(int level);

enum class mesh_format { off, obj };

/// ASCII OFF/OBJ import; polygons are fan-triangulated. Degenerate elements
/// are rejected with their index; non-manifold edges produce warnings.
surface_mesh import_mesh(const std::string& path, mesh_format format,
                         bool flip_orientation = false,
                         std::vector<std::string>* warnings = nullptr);

struct time_grid {
  double dt = 0.0;
  int n_steps = 0;
  double horizon = 0.0;
  double wave_speed = 1.0;
  double requested_cfl = 0.0;
  double achieved_cfl = 0.0;

  double t(int m) const { return m * dt; }
};

/// Uniform grid with dt chosen so that n_steps = round(horizon / (cfl h / c))
/// is integral; the achieved CFL c dt / h is reported alongside the request.
time_grid cfl_timegrid(const surface_mesh& mesh, double cfl, double horizon,
                       double wave_speed = 1.0);

}  // namespace stbem

#endif
