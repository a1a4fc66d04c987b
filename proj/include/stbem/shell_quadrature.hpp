#ifndef STBEM_SHELL_QUADRATURE_HPP
#define STBEM_SHELL_QUADRATURE_HPP

#include <Eigen/Dense>
#include <array>

namespace stbem {

/// Radial kernels appearing in retarded-layer Galerkin entries; r = |x-y|.
enum class radial_kernel {
  single_layer,         // 1 / (4 pi r)
  adjoint_double_layer  // nu_x . (x-y) / (4 pi r^3)
};

/// Integrates a radial kernel over { y in triangle : r_in <= |x-y| <= r_out }
/// for a fixed exterior point x. The triangle is decomposed into signed fans
/// about the foot point of x; the radial direction is integrated in closed
/// form and the angular direction by Gauss panels split at the angles where a
/// shell circle meets an edge, so the only error is the (spectrally
/// convergent) angular quadrature.
///
/// Instances are cheap to build and reusable across shells for the same
/// (x, triangle) pair.
class shell_integrator {
 public:
  shell_integrator(const Eigen::Vector3d& x, const Eigen::Vector3d& p0,
                   const Eigen::Vector3d& p1, const Eigen::Vector3d& p2);

  /// nu_x is ignored for the single-layer kernel.
  double integrate(radial_kernel kernel, const Eigen::Vector3d& nu_x, double r_in,
                   double r_out) const;

 private:
  struct edge_fan {
    double theta0;   // angle of the first vertex
    double dtheta;   // signed sweep to the second vertex, in (-pi, pi)
    double nx, ny;   // unit normal of the edge line, oriented so that c > 0
    double c;        // distance from the foot point to the edge line
    bool degenerate; // zero sweep or edge line through the foot point
  };

  double panel(radial_kernel kernel, const edge_fan& f, double s0, double s1, double rho_in,
               double rho_out, double A, double a, double b) const;
  double integrand(radial_kernel kernel, const edge_fan& f, double theta, double rho_in,
                   double rho_out, double A, double a, double b) const;

  double delta_;        // unsigned distance from x to the triangle plane
  double signed_delta_; // signed, with respect to n_
  double scale_ = 0.0;  // largest in-plane vertex offset, for tolerances
  Eigen::Vector3d n_, e1_, e2_;
  std::array<Eigen::Vector2d, 3> q_;  // vertices in foot-point coordinates
  std::array<edge_fan, 3> fans_;
};

/// One-shot convenience wrapper.
double shell_restricted_integral(radial_kernel kernel, const Eigen::Vector3d& x,
                                 const Eigen::Vector3d& nu_x, const Eigen::Vector3d& p0,
                                 const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                                 double r_in, double r_out);

}  // namespace stbem

#endif
