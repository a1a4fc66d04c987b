#include "stbem/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "stbem/gauss.hpp"
#include "stbem/geometry.hpp"
#include "stbem/parallel.hpp"
#include "stbem/shell_quadrature.hpp"

namespace stbem {

// ---------------------------------------------------------------------------
// geometry helpers

double point_segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b) {
  const Eigen::Vector3d d = b - a;
  const double dd = d.squaredNorm();
  double t = dd > 0.0 ? (p - a).dot(d) / dd : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const Eigen::Vector3d n = ab.cross(ac);
  const double nn = n.squaredNorm();
  if (nn > 0.0) {
    // Barycentric test of the in-plane projection.
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    const double a11 = ab.squaredNorm(), a12 = ab.dot(ac), a22 = ac.squaredNorm();
    const double det = a11 * a22 - a12 * a12;
    const double u = (a22 * d1 - a12 * d2) / det;
    const double v = (a11 * d2 - a12 * d1) / det;
    if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) return std::abs(ap.dot(n)) / std::sqrt(nn);
  }
  return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                   point_segment_distance(p, c, a)});
}

double segment_segment_distance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                                const Eigen::Vector3d& p2, const Eigen::Vector3d& q2) {
  // Closest points of two segments (Ericson, Real-Time Collision Detection).
  const Eigen::Vector3d d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s, t;
  if (a <= 1e-300 && e <= 1e-300) return r.norm();
  if (a <= 1e-300) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-300) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

double triangle_min_distance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                             const Eigen::Vector3d& a2, const Eigen::Vector3d& b0,
                             const Eigen::Vector3d& b1, const Eigen::Vector3d& b2) {
  const Eigen::Vector3d* A[3] = {&a0, &a1, &a2};
  const Eigen::Vector3d* B[3] = {&b0, &b1, &b2};
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d = std::min(d, segment_segment_distance(*A[i], *A[(i + 1) % 3], *B[j], *B[(j + 1) % 3]));
  for (int i = 0; i < 3; ++i) {
    d = std::min(d, point_triangle_distance(*A[i], b0, b1, b2));
    d = std::min(d, point_triangle_distance(*B[i], a0, a1, a2));
  }
  return d;
}

double triangle_max_distance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                             const Eigen::Vector3d& a2, const Eigen::Vector3d& b0,
                             const Eigen::Vector3d& b1, const Eigen::Vector3d& b2) {
  const Eigen::Vector3d* A[3] = {&a0, &a1, &a2};
  const Eigen::Vector3d* B[3] = {&b0, &b1, &b2};
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d = std::max(d, (*A[i] - *B[j]).norm());
  return d;
}

// ---------------------------------------------------------------------------
// toeplitz_blocks

void toeplitz_blocks::apply_block(int j, const Eigen::VectorXd& x, Eigen::VectorXd& y,
                                  double scale) const {
  if (!has_block(j)) return;
  y += scale * (blocks[j] * x);
}

Eigen::MatrixXd toeplitz_blocks::dense_block(int j) const {
  if (j < 0 || j > truncation) return Eigen::MatrixXd::Zero(n_rows, n_cols);
  return Eigen::MatrixXd(blocks[j]);
}

double toeplitz_blocks::block_max_norm(int j) const {
  if (!has_block(j)) return 0.0;
  double m = 0.0;
  for (int k = 0; k < blocks[j].outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(blocks[j], k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double toeplitz_blocks::sum_max_norm() const {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n_rows, n_cols);
  for (int j = 0; j <= truncation; ++j)
    if (has_block(j)) sum += dense_block(j);
  return sum.cwiseAbs().maxCoeff();
}

void toeplitz_blocks::dump_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dump_csv: cannot write " + path);
  os << "j,row,col,value\n";
  os.precision(17);
  for (int j = 0; j <= truncation; ++j) {
    if (!has_block(j)) continue;
    for (int k = 0; k < blocks[j].outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(blocks[j], k); it; ++it)
        os << j << "," << it.row() << "," << it.col() << "," << it.value() << "\n";
  }
}

// ---------------------------------------------------------------------------
// assembly

namespace {

struct outer_point {
  Eigen::Vector3d x;
  double w;  // includes element area
};

// Quadrature points on a test element; touching pairs get a uniformly
// subdivided rule to resolve the near-singular inner integral.
void outer_points_on(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c, int order, int refine,
                     std::vector<outer_point>& out) {
  if (refine == 0) {
    const triangle_rule& rule = triangle_gauss(order);
    const double area = 0.5 * (b - a).cross(c - a).norm();
    for (std::size_t k = 0; k < rule.w.size(); ++k) {
      out.push_back({a + rule.a[k] * (b - a) + rule.b[k] * (c - a), area * rule.w[k]});
    }
    return;
  }
  const Eigen::Vector3d ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  outer_points_on(a, ab, ca, order, refine - 1, out);
  outer_points_on(ab, b, bc, order, refine - 1, out);
  outer_points_on(ca, bc, c, order, refine - 1, out);
  outer_points_on(ab, bc, ca, order, refine - 1, out);
}

struct pair_range {
  double dmin, dmax;
  int j_lo, j_hi;  // shell indices with possible support, with one shell margin
};

pair_range shell_range(const surface_mesh& mesh, std::size_t r, std::size_t s, double dtc,
                       int max_block) {
  pair_range pr;
  pr.dmin = triangle_min_distance(mesh.vertex_of(r, 0), mesh.vertex_of(r, 1),
                                  mesh.vertex_of(r, 2), mesh.vertex_of(s, 0),
                                  mesh.vertex_of(s, 1), mesh.vertex_of(s, 2));
  pr.dmax = triangle_max_distance(mesh.vertex_of(r, 0), mesh.vertex_of(r, 1),
                                  mesh.vertex_of(r, 2), mesh.vertex_of(s, 0),
                                  mesh.vertex_of(s, 1), mesh.vertex_of(s, 2));
  pr.j_lo = std::max(0, static_cast<int>(std::floor(pr.dmin / dtc)) - 1);
  pr.j_hi = std::min(max_block, static_cast<int>(std::floor(pr.dmax / dtc)) + 1);
  return pr;
}

using triplet_buffers = std::vector<std::vector<Eigen::Triplet<double>>>;

toeplitz_blocks finish_blocks(operator_tag tag, const surface_mesh& mesh,
                              const time_grid& grid, int L,
                              std::vector<triplet_buffers>& per_worker) {
  toeplitz_blocks out;
  out.tag = tag;
  out.dt = grid.dt;
  out.wave_speed = grid.wave_speed;
  out.truncation = L;
  out.n_rows = static_cast<Eigen::Index>(mesh.n_elements());
  out.n_cols = out.n_rows;
  out.blocks.resize(L + 1);
  for (int j = 0; j <= L; ++j) {
    std::vector<Eigen::Triplet<double>> merged;
    std::size_t total = 0;
    for (const auto& w : per_worker) total += w[j].size();
    merged.reserve(total);
    for (const auto& w : per_worker)
      merged.insert(merged.end(), w[j].begin(), w[j].end());
    out.blocks[j].resize(out.n_rows, out.n_cols);
    out.blocks[j].setFromTriplets(merged.begin(), merged.end());
    out.blocks[j].makeCompressed();
  }
  return out;
}

bool coplanar_pair(const surface_mesh& mesh, std::size_t r, std::size_t s, double scale) {
  const Eigen::Vector3d& nr = mesh.normals[r];
  const Eigen::Vector3d& ns = mesh.normals[s];
  if (nr.cross(ns).norm() > 1e-12) return false;
  return std::abs((mesh.centroids[r] - mesh.centroids[s]).dot(ns)) <= 1e-12 * scale;
}

}  // namespace

toeplitz_blocks assemble_single_layer(const surface_mesh& mesh, const time_grid& grid,
                                      const assembly_options& opts) {
  if (!(grid.dt > 0.0)) throw std::invalid_argument("assemble_single_layer: dt must be > 0");
  const std::size_t n = mesh.n_elements();
  const double dtc = grid.wave_speed * grid.dt;
  const double diam = mesh.hull_diameter();
  const int L = static_cast<int>(std::ceil(diam / dtc)) + 1;
  const int n_threads = resolve_threads(opts.threads);

  std::vector<triplet_buffers> buffers(n_threads, triplet_buffers(L + 1));

  parallel_for(n, opts.threads, [&](int worker, std::size_t r) {
    std::vector<outer_point> pts;
    std::vector<double> B;
    for (std::size_t s = r; s < n; ++s) {
      const pair_range pr = shell_range(mesh, r, s, dtc, L);
      if (pr.j_lo > pr.j_hi) continue;

      pts.clear();
      const bool touching = pr.dmin < 1e-12 * (mesh.diameters[r] + mesh.diameters[s]);
      outer_points_on(mesh.vertex_of(r, 0), mesh.vertex_of(r, 1), mesh.vertex_of(r, 2),
                      opts.outer_order, touching ? opts.touching_refine : 0, pts);

      // Shell integrals B_j, reused by the two blocks they feed so that the
      // block sum telescopes to zero at rounding level.
      const int nb = pr.j_hi - pr.j_lo + 1;
      B.assign(nb, 0.0);
      for (const outer_point& op : pts) {
        shell_integrator integ(op.x, mesh.vertex_of(s, 0), mesh.vertex_of(s, 1),
                               mesh.vertex_of(s, 2));
        for (int j = pr.j_lo; j <= pr.j_hi; ++j)
          B[j - pr.j_lo] += op.w * integ.integrate(radial_kernel::single_layer,
                                                   mesh.normals[r], j * dtc, (j + 1) * dtc);
      }

      for (int j = pr.j_lo; j <= std::min(pr.j_hi + 1, L); ++j) {
        const double bj = (j <= pr.j_hi) ? B[j - pr.j_lo] : 0.0;
        const double bprev = (j - 1 >= pr.j_lo && j - 1 <= pr.j_hi) ? B[j - 1 - pr.j_lo] : 0.0;
        const double val = bj - bprev;
        if (val == 0.0) continue;
        buffers[worker][j].emplace_back(static_cast<int>(r), static_cast<int>(s), val);
        if (s != r)
          buffers[worker][j].emplace_back(static_cast<int>(s), static_cast<int>(r), val);
      }
    }
  });

  return finish_blocks(operator_tag::single_layer, mesh, grid, L, buffers);
}

toeplitz_blocks assemble_adjoint_double_layer(const surface_mesh& mesh, const time_grid& grid,
                                              const assembly_options& opts) {
  if (!(grid.dt > 0.0))
    throw std::invalid_argument("assemble_adjoint_double_layer: dt must be > 0");
  const std::size_t n = mesh.n_elements();
  const double dtc = grid.wave_speed * grid.dt;
  const double diam = mesh.hull_diameter();
  const int L = static_cast<int>(std::ceil(diam / dtc)) + 1;
  const int n_threads = resolve_threads(opts.threads);

  std::vector<triplet_buffers> buffers(n_threads, triplet_buffers(L + 1));

  parallel_for(n, opts.threads, [&](int worker, std::size_t r) {
    std::vector<outer_point> pts;
    std::vector<double> D;
    for (std::size_t s = 0; s < n; ++s) {
      if (coplanar_pair(mesh, r, s, diam)) continue;  // entries vanish identically
      const pair_range pr = shell_range(mesh, r, s, dtc, L);
      if (pr.j_lo > pr.j_hi) continue;

      pts.clear();
      const bool touching = pr.dmin < 1e-12 * (mesh.diameters[r] + mesh.diameters[s]);
      outer_points_on(mesh.vertex_of(r, 0), mesh.vertex_of(r, 1), mesh.vertex_of(r, 2),
                      opts.outer_order, touching ? opts.touching_refine : 0, pts);

      // Shell integrals D_j of the static adjoint double layer kernel
      // -nu_x.(x-y)/(4 pi r^3); the retarded block at offset j combines the
      // two adjacent shells as (1/c) (R_{j+1} D_j - R_{j-1} D_{j-1}).
      const int nb = pr.j_hi - pr.j_lo + 1;
      D.assign(nb, 0.0);
      for (const outer_point& op : pts) {
        shell_integrator integ(op.x, mesh.vertex_of(s, 0), mesh.vertex_of(s, 1),
                               mesh.vertex_of(s, 2));
        for (int j = pr.j_lo; j <= pr.j_hi; ++j)
          D[j - pr.j_lo] -= op.w * integ.integrate(radial_kernel::adjoint_double_layer,
                                                   mesh.normals[r], j * dtc, (j + 1) * dtc);
      }

      const double inv_c = 1.0 / grid.wave_speed;
      for (int j = pr.j_lo; j <= std::min(pr.j_hi + 1, L); ++j) {
        const double dj = (j <= pr.j_hi) ? D[j - pr.j_lo] : 0.0;
        const double dprev = (j - 1 >= pr.j_lo && j - 1 <= pr.j_hi) ? D[j - 1 - pr.j_lo] : 0.0;
        const double val = inv_c * ((j + 1) * dtc * dj - (j - 1) * dtc * dprev);
        if (val == 0.0) continue;
        buffers[worker][j].emplace_back(static_cast<int>(r), static_cast<int>(s), val);
      }
    }
  });

  return finish_blocks(operator_tag::adjoint_double_layer, mesh, grid, L, buffers);
}

Eigen::VectorXd assemble_mass(const surface_mesh& mesh,
                              const std::function<double(const Eigen::Vector3d&)>& weight,
                              int quad_order) {
  const triangle_rule& rule = triangle_gauss(quad_order);
  Eigen::VectorXd diag(mesh.n_elements());
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::Vector3d a = mesh.vertex_of(e, 0);
    const Eigen::Vector3d b = mesh.vertex_of(e, 1);
    const Eigen::Vector3d c = mesh.vertex_of(e, 2);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.w.size(); ++k) {
      const double w = weight(a + rule.a[k] * (b - a) + rule.b[k] * (c - a));
      if (!(w > 0.0))
        throw std::invalid_argument("assemble_mass: nonpositive weight on element " +
                                    std::to_string(e));
      acc += rule.w[k] * w;
    }
    diag[e] = mesh.areas[e] * acc;
  }
  return diag;
}

std::vector<Eigen::MatrixXd> eval_single_layer_potential(
    const stochastic_solution& density, const surface_mesh& mesh,
    const std::vector<Eigen::Vector3d>& points, const std::vector<double>& times,
    double min_distance_factor) {
  const std::size_t n_modes = density.coeff.n_modes;
  const std::size_t n_steps = density.coeff.n_steps;
  if (density.coeff.n_elems != mesh.n_elements())
    throw std::invalid_argument("eval_single_layer_potential: mesh/solution mismatch");
  const double c = density.wave_speed;
  const double dt = density.dt;
  const double h = mesh.max_diameter();

  for (const auto& p : points) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.n_elements(); ++e)
      dmin = std::min(dmin, point_triangle_distance(p, mesh.vertex_of(e, 0),
                                                    mesh.vertex_of(e, 1), mesh.vertex_of(e, 2)));
    if (dmin <= min_distance_factor * h)
      throw std::invalid_argument("eval_single_layer_potential: point on or too close to the surface");
  }

  std::vector<Eigen::MatrixXd> out(n_modes,
                                   Eigen::MatrixXd::Zero(times.size(), points.size()));

  parallel_for(points.size(), 0, [&](int, std::size_t p) {
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
      const Eigen::Vector3d a = mesh.vertex_of(e, 0);
      const Eigen::Vector3d b = mesh.vertex_of(e, 1);
      const Eigen::Vector3d cc = mesh.vertex_of(e, 2);
      const double dmin = point_triangle_distance(points[p], a, b, cc);
      const double dmax = std::max({(points[p] - a).norm(), (points[p] - b).norm(),
                                    (points[p] - cc).norm()});
      shell_integrator integ(points[p], a, b, cc);
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        if (c * t <= dmin) continue;  // causality
        // Step m contributes on radii (c(t - t_{m+1}), c(t - t_m)].
        for (std::size_t m = 0; m < n_steps; ++m) {
          const double r_hi = c * (t - m * dt);
          if (r_hi <= dmin) break;
          const double r_lo = std::max(0.0, c * (t - (m + 1) * dt));
          if (r_lo >= dmax) continue;
          const double w =
              integ.integrate(radial_kernel::single_layer, Eigen::Vector3d::UnitZ(), r_lo, r_hi);
          if (w == 0.0) continue;
          for (std::size_t i = 0; i < n_modes; ++i)
            out[i](ti, p) += w * density.coeff.at(i, m, e);
        }
      }
    }
  });

  return out;
}

}  // namespace stbem
