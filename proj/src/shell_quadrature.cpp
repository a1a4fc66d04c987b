#include "stbem/shell_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stbem/gauss.hpp"

namespace stbem {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);

double wrap_pm_pi(double a) { return std::remainder(a, kTwoPi); }

}  // namespace

shell_integrator::shell_integrator(const Eigen::Vector3d& x, const Eigen::Vector3d& p0,
                                   const Eigen::Vector3d& p1, const Eigen::Vector3d& p2) {
  n_ = (p1 - p0).cross(p2 - p0).normalized();
  signed_delta_ = (x - p0).dot(n_);
  delta_ = std::abs(signed_delta_);
  const Eigen::Vector3d foot = x - signed_delta_ * n_;

  e1_ = (p1 - p0).normalized();
  e2_ = n_.cross(e1_);

  const Eigen::Vector3d* pv[3] = {&p0, &p1, &p2};
  scale_ = 0.0;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d d = *pv[i] - foot;
    q_[i] = {d.dot(e1_), d.dot(e2_)};
    scale_ = std::max(scale_, q_[i].norm());
  }
  const double eps = 1e-14 * (scale_ + delta_ + 1e-300);

  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d& u = q_[i];
    const Eigen::Vector2d& v = q_[(i + 1) % 3];
    edge_fan& f = fans_[i];
    f.degenerate = true;
    const double w = u.x() * v.y() - u.y() * v.x();
    if (std::abs(w) <= eps * (u.norm() + v.norm() + eps)) continue;
    const double tu = std::atan2(u.y(), u.x());
    const double tv = std::atan2(v.y(), v.x());
    const double dth = wrap_pm_pi(tv - tu);
    if (std::abs(dth) >= M_PI - 1e-12) continue;
    Eigen::Vector2d t = v - u;
    Eigen::Vector2d nn(t.y(), -t.x());
    nn.normalize();
    double c = nn.dot(u);
    if (c < 0.0) {
      nn = -nn;
      c = -c;
    }
    if (c <= eps) continue;
    f.theta0 = tu;
    f.dtheta = dth;
    f.nx = nn.x();
    f.ny = nn.y();
    f.c = c;
    f.degenerate = false;
  }
}

double shell_integrator::integrand(radial_kernel kernel, const edge_fan& f, double theta,
                                   double rho_in, double rho_out, double A, double a,
                                   double b) const {
  const double co = std::cos(theta), si = std::sin(theta);
  const double den = f.nx * co + f.ny * si;
  if (!(den > 0.0)) return 0.0;
  const double R = f.c / den;
  const double hi = std::min(R, rho_out);
  const double lo = std::min(R, rho_in);
  if (!(hi > lo)) return 0.0;
  const double rhi = std::sqrt(delta_ * delta_ + hi * hi);
  const double rlo = std::sqrt(delta_ * delta_ + lo * lo);

  if (kernel == radial_kernel::single_layer) return kInv4Pi * (rhi - rlo);

  // nu.(x-y) = A - rho (a cos + b sin); primitives of rho/r^3 and rho^2/r^3.
  double val = 0.0;
  if (A != 0.0) val += A * (1.0 / rlo - 1.0 / rhi);
  const double ab = a * co + b * si;
  if (ab != 0.0) {
    const double ghi = std::log(hi + rhi) - hi / rhi;
    const double glo_arg = std::max(lo + rlo, 1e-300);
    const double glo = std::log(glo_arg) - (rlo > 0.0 ? lo / rlo : 0.0);
    val -= ab * (ghi - glo);
  }
  return kInv4Pi * val;
}

double shell_integrator::panel(radial_kernel kernel, const edge_fan& f, double s0, double s1,
                               double rho_in, double rho_out, double A, double a,
                               double b) const {
  struct frame {
    double s0, s1;
    int depth;
  };
  double total = 0.0;
  std::vector<frame> stack{{s0, s1, 0}};
  const gauss_rule& g10 = gauss_legendre(10);
  const gauss_rule& g20 = gauss_legendre(20);
  while (!stack.empty()) {
    frame fr = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (fr.s0 + fr.s1);
    const double half = 0.5 * (fr.s1 - fr.s0);
    double i10 = 0.0, i20 = 0.0, fmax = 0.0;
    for (int k = 0; k < 10; ++k) {
      double v = integrand(kernel, f, mid + half * g10.nodes[k], rho_in, rho_out, A, a, b);
      i10 += g10.weights[k] * v;
    }
    for (int k = 0; k < 20; ++k) {
      double v = integrand(kernel, f, mid + half * g20.nodes[k], rho_in, rho_out, A, a, b);
      i20 += g20.weights[k] * v;
      fmax = std::max(fmax, std::abs(v));
    }
    i10 *= half;
    i20 *= half;
    const double err = std::abs(i20 - i10);
    const double tol = 1e-12 * std::abs(i20) + 1e-13 * fmax * std::abs(2.0 * half) + 1e-300;
    if (err <= tol || fr.depth >= 16 || std::abs(half) < 1e-15) {
      total += i20;
    } else {
      stack.push_back({fr.s0, mid, fr.depth + 1});
      stack.push_back({mid, fr.s1, fr.depth + 1});
    }
  }
  return total;
}

double shell_integrator::integrate(radial_kernel kernel, const Eigen::Vector3d& nu_x,
                                   double r_in, double r_out) const {
  if (!(r_out > 0.0) || !(r_out > r_in) || r_out <= delta_) return 0.0;
  const double rho_out = std::sqrt(r_out * r_out - delta_ * delta_);
  const double rho_in =
      (r_in > delta_) ? std::sqrt(std::max(r_in * r_in - delta_ * delta_, 0.0)) : 0.0;
  if (!(rho_out > rho_in)) return 0.0;

  double A = 0.0, a = 0.0, b = 0.0;
  if (kernel == radial_kernel::adjoint_double_layer) {
    A = signed_delta_ * nu_x.dot(n_);
    a = nu_x.dot(e1_);
    b = nu_x.dot(e2_);
    // Coplanar configuration: nu_x orthogonal to x-y for every y.
    if (std::abs(A) < 1e-14 * (delta_ + scale_) && std::abs(a) < 1e-14 &&
        std::abs(b) < 1e-14)
      return 0.0;
  }

  double total = 0.0;
  for (const edge_fan& f : fans_) {
    if (f.degenerate) continue;
    const double len = f.dtheta;  // signed sweep

    // Angles where a shell circle meets the edge line split the panel at the
    // kinks of min(R, rho).
    double cuts[4];
    int n_cuts = 0;
    const double theta_n = std::atan2(f.ny, f.nx);
    for (double rho : {rho_in, rho_out}) {
      if (!(rho > f.c)) continue;
      const double phi = std::acos(std::min(1.0, f.c / rho));
      for (double cand : {theta_n + phi, theta_n - phi}) {
        const double off = wrap_pm_pi(cand - f.theta0);
        // Position along the signed sweep.
        if (len > 0.0 ? (off > 1e-14 && off < len - 1e-14)
                      : (off < -1e-14 && off > len + 1e-14))
          cuts[n_cuts++] = off;
      }
    }
    std::sort(cuts, cuts + n_cuts,
              [len](double l, double r) { return len > 0.0 ? l < r : l > r; });

    double prev = 0.0;
    for (int k = 0; k <= n_cuts; ++k) {
      const double next = (k == n_cuts) ? len : cuts[k];
      total += panel(kernel, f, f.theta0 + prev, f.theta0 + next, rho_in, rho_out, A, a, b);
      prev = next;
    }
  }
  return total;
}

double shell_restricted_integral(radial_kernel kernel, const Eigen::Vector3d& x,
                                 const Eigen::Vector3d& nu_x, const Eigen::Vector3d& p0,
                                 const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                                 double r_in, double r_out) {
  return shell_integrator(x, p0, p1, p2).integrate(kernel, nu_x, r_in, r_out);
}

}  // namespace stbem
