#include "stbem/solver.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "stbem/gauss.hpp"
#include "stbem/parallel.hpp"

namespace stbem {

namespace {

// Contracts a tensor-grid sample vector (little-endian node index, q nodes per
// dimension) against the 1D orthonormal Legendre table, one dimension at a
// time. Output is mode-major with the same little-endian convention as
// multi_index_set.
std::vector<double> tensor_project(const std::vector<double>& values, int dim, int q,
                                   const Eigen::MatrixXd& psi) {
  const int n_deg = static_cast<int>(psi.rows());
  std::vector<double> cur = values;
  std::vector<double> next;
  std::size_t lead = 1;  // product of mode extents already contracted
  std::size_t trail = values.size() / q;
  for (int d = 0; d < dim; ++d) {
    next.assign(lead * n_deg * trail, 0.0);
    // cur layout: [lead][q][trail]; next: [lead][n_deg][trail]
    for (std::size_t a = 0; a < lead; ++a)
      for (int k = 0; k < q; ++k)
        for (int i = 0; i < n_deg; ++i) {
          const double p = psi(i, k);
          if (p == 0.0) continue;
          const double* src = cur.data() + (a + lead * k) * trail;
          double* dst = next.data() + (a + lead * i) * trail;
          for (std::size_t t = 0; t < trail; ++t) dst[t] += p * src[t];
        }
    cur.swap(next);
    lead *= n_deg;
    trail /= q;
  }
  return cur;
}

std::string point_string(double t, const Eigen::Vector3d& x, std::span<const double> xi) {
  std::ostringstream os;
  os << "(t=" << t << ", x=[" << x.x() << "," << x.y() << "," << x.z() << "], xi=[";
  for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? "," : "") << xi[i];
  os << "])";
  return os.str();
}

struct lu_with_check {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  explicit lu_with_check(const Eigen::MatrixXd& m, const char* what) : lu(m) {
    const Eigen::VectorXd d = lu.matrixLU().diagonal().cwiseAbs();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    if (!(dmax > 0.0) || dmin < 1e-14 * dmax) {
      std::ostringstream os;
      os << what << ": singular step matrix (pivot ratio "
         << (dmax > 0 ? dmin / dmax : 0.0) << ")";
      throw std::runtime_error(os.str());
    }
  }
};

}  // namespace

mode_tensor project_rhs(const space_time_xi_fn& f, const space_time_xi_fn& dfdt,
                        const pc_basis& basis, const surface_mesh& mesh,
                        const time_grid& grid, bool apply_time_derivative,
                        const rhs_projection_options& opts) {
  const int dim = basis.dim();
  const int q = opts.stochastic_order > 0 ? opts.stochastic_order : basis.quad_order();
  const gauss_rule& xi_rule = gauss_legendre(q);
  const gauss_rule& t_rule = gauss_legendre(opts.time_order);
  const triangle_rule& x_rule = triangle_gauss(opts.triangle_order);

  std::size_t n_nodes = 1;
  for (int d = 0; d < dim; ++d) n_nodes *= static_cast<std::size_t>(q);

  Eigen::MatrixXd psi(basis.max_degree() + 1, q);
  for (int d = 0; d <= basis.max_degree(); ++d)
    for (int k = 0; k < q; ++k) psi(d, k) = eval_legendre_orthonormal(d, xi_rule.nodes[k]);

  // Probability weights of the tensor nodes (dxi/2 per dimension).
  std::vector<double> node_w(n_nodes);
  std::vector<std::vector<double>> node_xi(n_nodes, std::vector<double>(dim));
  {
    std::vector<int> idx(dim, 0);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      double w = 1.0;
      for (int d = 0; d < dim; ++d) {
        node_xi[k][d] = xi_rule.nodes[idx[d]];
        w *= 0.5 * xi_rule.weights[idx[d]];
      }
      node_w[k] = w;
      for (int d = 0; d < dim; ++d) {
        if (++idx[d] < q) break;
        idx[d] = 0;
      }
    }
  }

  auto g_eval = [&](double t, const Eigen::Vector3d& x, std::span<const double> xi) {
    double v;
    if (!apply_time_derivative) {
      v = f(t, x, xi);
    } else if (dfdt) {
      v = dfdt(t, x, xi);
    } else {
      const double e = opts.fd_step_rel * grid.dt;
      v = (-f(t + 2 * e, x, xi) + 8 * f(t + e, x, xi) - 8 * f(t - e, x, xi) +
           f(t - 2 * e, x, xi)) /
          (12 * e);
    }
    if (!std::isfinite(v))
      throw std::runtime_error("project_rhs: non-finite sample at " + point_string(t, x, xi));
    return v;
  };

  const std::size_t n_steps = static_cast<std::size_t>(grid.n_steps);
  const std::size_t n_elems = mesh.n_elements();
  mode_tensor F(basis.n_modes(), n_steps, n_elems);

  parallel_for(n_steps * n_elems, opts.threads, [&](int, std::size_t cell) {
    const std::size_t l = cell / n_elems;
    const std::size_t r = cell % n_elems;
    const Eigen::Vector3d a = mesh.vertex_of(r, 0);
    const Eigen::Vector3d b = mesh.vertex_of(r, 1);
    const Eigen::Vector3d c = mesh.vertex_of(r, 2);
    const double t0 = l * grid.dt;

    // Space-time reduced samples per stochastic node.
    std::vector<double> g(n_nodes, 0.0);
    for (int kt = 0; kt < opts.time_order; ++kt) {
      const double t = t0 + 0.5 * grid.dt * (t_rule.nodes[kt] + 1.0);
      const double wt = 0.5 * grid.dt * t_rule.weights[kt];
      for (std::size_t kx = 0; kx < x_rule.w.size(); ++kx) {
        const Eigen::Vector3d x = a + x_rule.a[kx] * (b - a) + x_rule.b[kx] * (c - a);
        const double w = wt * mesh.areas[r] * x_rule.w[kx];
        for (std::size_t kxi = 0; kxi < n_nodes; ++kxi)
          g[kxi] += w * g_eval(t, x, node_xi[kxi]);
      }
    }
    for (std::size_t kxi = 0; kxi < n_nodes; ++kxi) g[kxi] *= node_w[kxi];

    const std::vector<double> modes = tensor_project(g, dim, q, psi);
    for (std::size_t i = 0; i < basis.n_modes(); ++i) F.at(i, l, r) = modes[i];
  });

  return F;
}

stochastic_solution mot_dirichlet(const toeplitz_blocks& V, const mode_tensor& F,
                                  const pc_basis& basis, const surface_mesh& mesh,
                                  const time_grid& grid, const solve_options& opts) {
  if (F.n_modes != basis.n_modes() || F.n_elems != mesh.n_elements() ||
      F.n_steps != static_cast<std::size_t>(grid.n_steps))
    throw std::invalid_argument("mot_dirichlet: shape mismatch");

  const lu_with_check lu(V.dense_block(0), "mot_dirichlet");

  stochastic_solution sol;
  sol.stochastic_dim = basis.dim();
  sol.max_degree = basis.max_degree();
  sol.dt = grid.dt;
  sol.wave_speed = grid.wave_speed;
  sol.mesh_hash = mesh.content_hash();
  sol.coeff = mode_tensor(F.n_modes, F.n_steps, F.n_elems);

  parallel_for(F.n_modes, opts.threads, [&](int, std::size_t i) {
    Eigen::VectorXd rhs(F.n_elems);
    for (std::size_t l = 0; l < F.n_steps; ++l) {
      rhs = F.slab(i, l);
      for (std::size_t m = 0; m < l; ++m) {
        const int j = static_cast<int>(l - m);
        if (!V.has_block(j)) continue;
        rhs -= V.blocks[j] * sol.coeff.slab(i, m);
      }
      sol.coeff.slab(i, l) = lu.lu.solve(rhs);
    }
  });
  return sol;
}

stochastic_solution mot_second_kind(const toeplitz_blocks& V, const toeplitz_blocks& Kp,
                                    const stochastic_alpha& alpha,
                                    const Eigen::VectorXd& mass_diag, const mode_tensor& G,
                                    const pc_basis& basis, const surface_mesh& mesh,
                                    const time_grid& grid, const solve_options& opts) {
  (void)opts;
  const std::size_t nm = basis.n_modes();
  const std::size_t ne = mesh.n_elements();
  const std::size_t ns = static_cast<std::size_t>(grid.n_steps);
  if (G.n_modes != nm || G.n_elems != ne || G.n_steps != ns)
    throw std::invalid_argument("mot_second_kind: shape mismatch");
  if (alpha.patch_of_elem.size() != ne)
    throw std::invalid_argument("mot_second_kind: alpha patch map does not cover elements");
  for (int p : alpha.patch_of_elem)
    if (p < 0 || p >= static_cast<int>(alpha.S.size()))
      throw std::invalid_argument("mot_second_kind: alpha patch index out of range");
  for (const auto& S : alpha.S)
    if (S.rows() != static_cast<Eigen::Index>(nm) || S.cols() != static_cast<Eigen::Index>(nm))
      throw std::invalid_argument("mot_second_kind: stochastic matrix size mismatch");

  const Eigen::MatrixXd V0 = V.dense_block(0);
  const Eigen::MatrixXd Kp0 = Kp.dense_block(0);

  // Step matrix in (mode, element) ordering, mode-major.
  const std::size_t dim = nm * ne;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < nm; ++i)
    for (std::size_t r = 0; r < ne; ++r) {
      const std::size_t row = i * ne + r;
      const Eigen::MatrixXd& S = alpha.S[alpha.patch_of_elem[r]];
      for (std::size_t ip = 0; ip < nm; ++ip) {
        const double s = S(i, ip);
        if (ip == i) {
          for (std::size_t c = 0; c < ne; ++c)
            M(row, ip * ne + c) = Kp0(r, c) - s * V0(r, c);
          M(row, ip * ne + r) -= 0.5 * grid.dt * mass_diag[r];
        } else if (s != 0.0) {
          for (std::size_t c = 0; c < ne; ++c) M(row, ip * ne + c) = -s * V0(r, c);
        }
      }
    }
  const lu_with_check lu(M, "mot_second_kind");

  stochastic_solution sol;
  sol.stochastic_dim = basis.dim();
  sol.max_degree = basis.max_degree();
  sol.dt = grid.dt;
  sol.wave_speed = grid.wave_speed;
  sol.mesh_hash = mesh.content_hash();
  sol.coeff = mode_tensor(nm, ns, ne);

  Eigen::VectorXd rhs(dim);
  Eigen::MatrixXd Vp(ne, nm);  // V^{l-m} applied per mode, columnwise
  for (std::size_t l = 0; l < ns; ++l) {
    for (std::size_t i = 0; i < nm; ++i)
      rhs.segment(i * ne, ne) = G.slab(i, l);
    for (std::size_t m = 0; m < l; ++m) {
      const int j = static_cast<int>(l - m);
      const bool havev = V.has_block(j);
      const bool havek = Kp.has_block(j);
      if (!havev && !havek) continue;
      if (havev)
        for (std::size_t ip = 0; ip < nm; ++ip)
          Vp.col(ip) = V.blocks[j] * sol.coeff.slab(ip, m);
      for (std::size_t i = 0; i < nm; ++i) {
        auto seg = rhs.segment(i * ne, ne);
        if (havek) seg -= Kp.blocks[j] * sol.coeff.slab(i, m);
        if (havev)
          for (std::size_t r = 0; r < ne; ++r) {
            const Eigen::MatrixXd& S = alpha.S[alpha.patch_of_elem[r]];
            double acc = 0.0;
            for (std::size_t ip = 0; ip < nm; ++ip) acc += S(i, ip) * Vp(r, ip);
            seg[r] += acc;
          }
      }
    }
    const Eigen::VectorXd x = lu.lu.solve(rhs);
    for (std::size_t i = 0; i < nm; ++i) sol.coeff.slab(i, l) = x.segment(i * ne, ne);
  }
  return sol;
}

Eigen::MatrixXd det_second_kind(const toeplitz_blocks& V, const toeplitz_blocks& Kp,
                                const Eigen::VectorXd& alpha_of_elem,
                                const Eigen::VectorXd& mass_diag, const Eigen::MatrixXd& G) {
  const Eigen::Index ne = alpha_of_elem.size();
  Eigen::MatrixXd M = Kp.dense_block(0) - alpha_of_elem.asDiagonal() * V.dense_block(0);
  M.diagonal() -= 0.5 * V.dt * mass_diag;
  const lu_with_check lu(M, "det_second_kind");

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(G.rows(), ne);
  Eigen::VectorXd rhs(ne);
  for (Eigen::Index l = 0; l < G.rows(); ++l) {
    rhs = G.row(l).transpose();
    for (Eigen::Index m = 0; m < l; ++m) {
      const int j = static_cast<int>(l - m);
      if (Kp.has_block(j)) rhs -= Kp.blocks[j] * p.row(m).transpose();
      if (V.has_block(j))
        rhs += alpha_of_elem.asDiagonal() * (V.blocks[j] * p.row(m).transpose());
    }
    p.row(l) = lu.lu.solve(rhs).transpose();
  }
  return p;
}

Eigen::MatrixXd det_dirichlet(const toeplitz_blocks& V, const Eigen::MatrixXd& F) {
  const lu_with_check lu(V.dense_block(0), "det_dirichlet");
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(F.rows(), F.cols());
  Eigen::VectorXd rhs(F.cols());
  for (Eigen::Index l = 0; l < F.rows(); ++l) {
    rhs = F.row(l).transpose();
    for (Eigen::Index m = 0; m < l; ++m) {
      const int j = static_cast<int>(l - m);
      if (V.has_block(j)) rhs -= V.blocks[j] * phi.row(m).transpose();
    }
    phi.row(l) = lu.lu.solve(rhs).transpose();
  }
  return phi;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct moment_accumulator {
  double n = 0;
  Eigen::ArrayXXd m1, m2, m3, m4;

  void init(Eigen::Index rows, Eigen::Index cols) {
    m1 = Eigen::ArrayXXd::Zero(rows, cols);
    m2 = m1;
    m3 = m1;
    m4 = m1;
  }
  void add(const Eigen::ArrayXXd& x) {
    const double n1 = n;
    n += 1.0;
    const Eigen::ArrayXXd d = x - m1;
    const Eigen::ArrayXXd dn = d / n;
    const Eigen::ArrayXXd dn2 = dn * dn;
    const Eigen::ArrayXXd t1 = d * dn * n1;
    m4 += t1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2 - 4 * dn * m3;
    m3 += t1 * dn * (n - 2) - 3 * dn * m2;
    m2 += t1;
    m1 += dn;
  }
  // Pebay pairwise combination.
  void merge(const moment_accumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = n, nb = o.n, nn = na + nb;
    const Eigen::ArrayXXd d = o.m1 - m1;
    const Eigen::ArrayXXd d2 = d * d;
    Eigen::ArrayXXd M2 = m2 + o.m2 + d2 * (na * nb / nn);
    Eigen::ArrayXXd M3 = m3 + o.m3 + d * d2 * (na * nb * (na - nb) / (nn * nn)) +
                         3.0 * d * (na * o.m2 - nb * m2) / nn;
    Eigen::ArrayXXd M4 = m4 + o.m4 +
                         d2 * d2 * (na * nb * (na * na - na * nb + nb * nb) / (nn * nn * nn)) +
                         6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nn * nn) +
                         4.0 * d * (na * o.m3 - nb * m3) / nn;
    m1 += d * (nb / nn);
    m2 = std::move(M2);
    m3 = std::move(M3);
    m4 = std::move(M4);
    n = nn;
  }
};

}  // namespace

mc_statistics mc_reference_solve(
    int stochastic_dim, std::size_t n_samples, std::uint64_t seed,
    const std::function<Eigen::MatrixXd(std::span<const double>)>& deterministic_solve,
    int threads) {
  if (n_samples < 2) throw std::invalid_argument("mc_reference_solve: need at least 2 samples");

  // Fixed chunking keeps the merge order, and therefore the result,
  // independent of the thread count.
  const std::size_t n_chunks = std::min<std::size_t>(64, n_samples);
  std::vector<moment_accumulator> acc(n_chunks);

  parallel_for(n_chunks, threads, [&](int, std::size_t chunk) {
    const std::size_t lo = chunk * n_samples / n_chunks;
    const std::size_t hi = (chunk + 1) * n_samples / n_chunks;
    std::vector<double> xi(stochastic_dim);
    for (std::size_t k = lo; k < hi; ++k) {
      std::mt19937_64 eng(splitmix64(seed ^ (0x5851F42D4C957F2Dull * (k + 1))));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int d = 0; d < stochastic_dim; ++d) xi[d] = u(eng);
      Eigen::ArrayXXd field = deterministic_solve(xi).array();
      if (acc[chunk].n == 0) acc[chunk].init(field.rows(), field.cols());
      acc[chunk].add(field);
    }
  });

  moment_accumulator total;
  for (const auto& a : acc) total.merge(a);

  const double n = total.n;
  mc_statistics st;
  st.n_samples = static_cast<std::size_t>(n);
  st.mean = total.m1.matrix();
  Eigen::ArrayXXd var = total.m2 / (n - 1.0);
  st.variance = var.matrix();
  st.se_mean = (var / n).sqrt().matrix();
  const Eigen::ArrayXXd m4 = total.m4 / n;
  Eigen::ArrayXXd se_var2 = (m4 - var.square() * ((n - 3.0) / (n - 1.0))) / n;
  st.se_variance = se_var2.max(0.0).sqrt().matrix();
  return st;
}

}  // namespace stbem
